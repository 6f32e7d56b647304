#include <algorithm>

#include "ptin/kernels.hpp"

namespace ptin::kernels::scalar {

void coverage_mask(std::span<const double> xs_m, std::span<const double> ys_m,
                   double cx_m, double cy_m, double range_m,
                   std::span<std::uint8_t> out) {
  const double r2 = range_m * range_m;
  for (std::size_t i = 0; i < xs_m.size(); ++i) {
    const double dx = xs_m[i] - cx_m;
    const double dy = ys_m[i] - cy_m;
    const double d2 = dx * dx + dy * dy;
    out[i] = d2 <= r2 ? 1 : 0;
  }
}

void greenshields(std::span<const double> density_veh_km,
                  std::span<const double> free_kmh,
                  std::span<const double> limit_kmh, double jam_veh_km,
                  double floor_kmh, std::span<double> out) {
  for (std::size_t i = 0; i < density_veh_km.size(); ++i) {
    const double ratio = density_veh_km[i] / jam_veh_km;
    const double v = free_kmh[i] * (1.0 - ratio);
    out[i] = std::min(limit_kmh[i], std::max(floor_kmh, v));
  }
}

}  // namespace ptin::kernels::scalar
