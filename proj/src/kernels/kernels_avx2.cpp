// Compiled with -mavx2; only reached after a runtime CPU check.

#include <immintrin.h>

#include "ptin/kernels.hpp"

namespace ptin::kernels::avx2 {

void coverage_mask(std::span<const double> xs_m, std::span<const double> ys_m,
                   double cx_m, double cy_m, double range_m,
                   std::span<std::uint8_t> out) {
  const std::size_t n = xs_m.size();
  const std::size_t body = n - n % 4;
  const __m256d cx = _mm256_set1_pd(cx_m);
  const __m256d cy = _mm256_set1_pd(cy_m);
  const __m256d r2 = _mm256_set1_pd(range_m * range_m);
  for (std::size_t i = 0; i < body; i += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs_m.data() + i), cx);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys_m.data() + i), cy);
    const __m256d d2 = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
    const int mask = _mm256_movemask_pd(_mm256_cmp_pd(d2, r2, _CMP_LE_OQ));
    out[i] = mask & 1;
    out[i + 1] = (mask >> 1) & 1;
    out[i + 2] = (mask >> 2) & 1;
    out[i + 3] = (mask >> 3) & 1;
  }
  if (body < n) {
    scalar::coverage_mask(xs_m.subspan(body), ys_m.subspan(body), cx_m, cy_m,
                          range_m, out.subspan(body));
  }
}

void greenshields(std::span<const double> density_veh_km,
                  std::span<const double> free_kmh,
                  std::span<const double> limit_kmh, double jam_veh_km,
                  double floor_kmh, std::span<double> out) {
  const std::size_t n = density_veh_km.size();
  const std::size_t body = n - n % 4;
  const __m256d jam = _mm256_set1_pd(jam_veh_km);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d floor = _mm256_set1_pd(floor_kmh);
  for (std::size_t i = 0; i < body; i += 4) {
    const __m256d ratio = _mm256_div_pd(_mm256_loadu_pd(density_veh_km.data() + i), jam);
    const __m256d v = _mm256_mul_pd(_mm256_loadu_pd(free_kmh.data() + i),
                                    _mm256_sub_pd(one, ratio));
    const __m256d lo = _mm256_max_pd(v, floor);
    _mm256_storeu_pd(out.data() + i,
                     _mm256_min_pd(lo, _mm256_loadu_pd(limit_kmh.data() + i)));
  }
  if (body < n) {
    scalar::greenshields(density_veh_km.subspan(body), free_kmh.subspan(body),
                         limit_kmh.subspan(body), jam_veh_km, floor_kmh,
                         out.subspan(body));
  }
}

}  // namespace ptin::kernels::avx2
