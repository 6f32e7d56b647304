#include <atomic>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

#include "ptin/kernels.hpp"

namespace ptin::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(PTIN_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa detect() {
  const char* env = std::getenv("PTIN_FORCE_SCALAR");
  if (env != nullptr && std::strcmp(env, "0") != 0 && *env != '\0') return Isa::scalar;
  return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

Isa active_isa() { return current().load(std::memory_order_relaxed); }

bool isa_available(Isa isa) {
  return isa == Isa::scalar || (isa == Isa::avx2 && cpu_has_avx2());
}

void force_isa(Isa isa) {
  if (!isa_available(isa)) {
    throw std::invalid_argument(std::string("instruction set not available: ") + isa_name(isa));
  }
  current().store(isa, std::memory_order_relaxed);
}

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
  }
  return "unknown";
}

void coverage_mask(std::span<const double> xs_m, std::span<const double> ys_m,
                   double cx_m, double cy_m, double range_m,
                   std::span<std::uint8_t> out) {
#ifdef PTIN_HAVE_AVX2_KERNELS
  if (active_isa() == Isa::avx2) {
    avx2::coverage_mask(xs_m, ys_m, cx_m, cy_m, range_m, out);
    return;
  }
#endif
  scalar::coverage_mask(xs_m, ys_m, cx_m, cy_m, range_m, out);
}

void greenshields(std::span<const double> density_veh_km,
                  std::span<const double> free_kmh,
                  std::span<const double> limit_kmh, double jam_veh_km,
                  double floor_kmh, std::span<double> out) {
#ifdef PTIN_HAVE_AVX2_KERNELS
  if (active_isa() == Isa::avx2) {
    avx2::greenshields(density_veh_km, free_kmh, limit_kmh, jam_veh_km, floor_kmh, out);
    return;
  }
#endif
  scalar::greenshields(density_veh_km, free_kmh, limit_kmh, jam_veh_km, floor_kmh, out);
}

}  // namespace ptin::kernels
