#include <doctest.h>

#include <cstring>
#include <random>
#include <vector>

#include "fixtures.hpp"
#include "ptin/kernels.hpp"
#include "ptin/restoration.hpp"

using namespace ptin::kernels;

TEST_CASE("coverage mask counts the boundary as covered") {
  const std::vector<double> xs{3000.0, 3001.0, 0.0, -2121.0};
  const std::vector<double> ys{0.0, 0.0, -3000.0, 2121.0};
  std::vector<std::uint8_t> out(xs.size());
  scalar::coverage_mask(xs, ys, 0.0, 0.0, 3000.0, out);
  CHECK(out == std::vector<std::uint8_t>{1, 0, 1, 1});
}

TEST_CASE("speed-density relation is clamped to floor and limit") {
  const std::vector<double> density{0.0, 75.0, 150.0, 400.0};
  const std::vector<double> free(4, 60.0);
  const std::vector<double> limit{60.0, 25.0, 60.0, 60.0};
  std::vector<double> out(4);
  scalar::greenshields(density, free, limit, 150.0, 3.0, out);
  CHECK(out[0] == 60.0);
  CHECK(out[1] == 25.0);
  CHECK(out[2] == 3.0);
  CHECK(out[3] == 3.0);
}

#ifdef PTIN_HAVE_AVX2_KERNELS
TEST_CASE("scalar and AVX2 kernels are bit-identical") {
  if (!isa_available(Isa::avx2)) return;
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> coord(-20000.0, 20000.0);
  std::uniform_real_distribution<double> dens(0.0, 200.0);
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 17u, 1000u, 1303u}) {
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
      xs[i] = std::round(coord(rng));
      ys[i] = std::round(coord(rng));
    }
    std::vector<std::uint8_t> a(n), b(n);
    scalar::coverage_mask(xs, ys, 1234.0, -987.0, 9000.0, a);
    avx2::coverage_mask(xs, ys, 1234.0, -987.0, 9000.0, b);
    CHECK(a == b);

    std::vector<double> d(n), f(n), lim(n), sa(n), sb(n);
    for (std::size_t i = 0; i < n; ++i) {
      d[i] = dens(rng);
      f[i] = 60.0;
      lim[i] = rng() % 2 ? 60.0 : 25.0;
    }
    scalar::greenshields(d, f, lim, 150.0, 3.0, sa);
    avx2::greenshields(d, f, lim, 150.0, 3.0, sb);
    CHECK(std::memcmp(sa.data(), sb.data(), n * sizeof(double)) == 0);
  }
}

TEST_CASE("a run produces the same curve under either instruction set") {
  if (!isa_available(Isa::avx2)) return;
  const auto& s = fx::bundled();
  force_isa(Isa::scalar);
  const auto a = ptin::restore::run(s, ptin::restore::Strategy::a3, {});
  force_isa(Isa::avx2);
  const auto b = ptin::restore::run(s, ptin::restore::Strategy::a3, {});
  CHECK(a.curve_kw == b.curve_kw);
  CHECK(a.final_lane_density == b.final_lane_density);
}
#endif
