#pragma once

// Data-parallel inner loops. Each kernel has a scalar reference and an AVX2
// variant; the variant is chosen once at runtime from CPU features and can be
// pinned with PTIN_FORCE_SCALAR=1 or force_isa(). Variants are bit-identical.

#include <cstdint>
#include <span>

namespace ptin::kernels {

enum class Isa { scalar, avx2 };

Isa active_isa();
bool isa_available(Isa isa);
void force_isa(Isa isa);  // throws std::invalid_argument if unavailable
const char* isa_name(Isa isa);

// out[i] = 1 iff (xs[i]-cx)^2 + (ys[i]-cy)^2 <= range^2. All values in whole
// metres so the comparison is exact.
void coverage_mask(std::span<const double> xs_m, std::span<const double> ys_m,
                   double cx_m, double cy_m, double range_m,
                   std::span<std::uint8_t> out);

// Linear speed-density relation clamped to [floor, limit]:
//   out[i] = min(limit[i], max(floor, free[i] * (1 - density[i] / jam)))
void greenshields(std::span<const double> density_veh_km,
                  std::span<const double> free_kmh,
                  std::span<const double> limit_kmh, double jam_veh_km,
                  double floor_kmh, std::span<double> out);

namespace scalar {
void coverage_mask(std::span<const double> xs_m, std::span<const double> ys_m,
                   double cx_m, double cy_m, double range_m,
                   std::span<std::uint8_t> out);
void greenshields(std::span<const double> density_veh_km,
                  std::span<const double> free_kmh,
                  std::span<const double> limit_kmh, double jam_veh_km,
                  double floor_kmh, std::span<double> out);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define PTIN_HAVE_AVX2_KERNELS 1
namespace avx2 {
void coverage_mask(std::span<const double> xs_m, std::span<const double> ys_m,
                   double cx_m, double cy_m, double range_m,
                   std::span<std::uint8_t> out);
void greenshields(std::span<const double> density_veh_km,
                  std::span<const double> free_kmh,
                  std::span<const double> limit_kmh, double jam_veh_km,
                  double floor_kmh, std::span<double> out);
}  // namespace avx2
#endif

}  // namespace ptin::kernels
