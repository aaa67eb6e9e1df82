#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "semiclassical/errors.hpp"
#include "semiclassical/grid.hpp"

using namespace semiclassical;
using std::numbers::pi;

TEST_CASE("grid geometry and wavenumbers") {
  const Grid g = oracle::grid1(2 * pi, 8);
  CHECK(g.size() == 8);
  CHECK(g.spacing(0) == doctest::Approx(pi / 4));
  CHECK(g.coordinate(0, 0) == doctest::Approx(-pi));
  const auto k = g.wavenumbers(0);
  const std::vector<double> expected{0, 1, 2, 3, 4, -3, -2, -1};
  for (std::size_t i = 0; i < 8; ++i) CHECK(k[i] == doctest::Approx(expected[i]));
  const auto kd = g.derivative_wavenumbers(0);
  CHECK(std::accumulate(kd.begin(), kd.end(), 0.0) == doctest::Approx(0.0));
  CHECK(kd[4] == 0.0);

  const Grid g2 = oracle::grid2(4.0, 16);
  CHECK(g2.size() == 256);
  CHECK(g2.cell_volume() == doctest::Approx(0.0625));
  const auto p = g2.node(g2.flat_index(3, 5));
  CHECK(p[0] == doctest::Approx(-2.0 + 0.75));
  CHECK(p[1] == doctest::Approx(-2.0 + 1.25));
}

TEST_CASE("grid rejects bad shapes") {
  std::vector<double> e{1.0};
  std::vector<std::size_t> odd{9}, small{4};
  std::vector<double> neg{-1.0};
  std::vector<std::size_t> ok{16};
  CHECK_THROWS_AS(make_grid(1, e, odd), InvalidArgument);
  CHECK_THROWS_AS(make_grid(1, e, small), InvalidArgument);
  CHECK_THROWS_AS(make_grid(1, neg, ok), InvalidArgument);
  CHECK_THROWS_AS(make_grid(3, e, ok), InvalidArgument);
}

TEST_CASE("spectral derivative of sin is cos") {
  const Grid g = oracle::grid1(2 * pi, 64);
  RealField f(g, FieldUnits::dimensionless);
  for (std::size_t i = 0; i < g.size(); ++i) f.values[i] = std::sin(3 * g.node(i)[0]);
  const auto grad = gradient(f);
  const auto lap = laplacian(f);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.node(i)[0];
    CHECK(std::abs(grad[0].values[i] - 3 * std::cos(3 * x)) < 1e-12);
    CHECK(std::abs(lap.values[i] + 9 * std::sin(3 * x)) < 1e-11);
  }
}

TEST_CASE("gaussian laplacian in 2D matches the closed form") {
  const Grid g = oracle::grid2(20.0, 128);
  RealField f(g, FieldUnits::dimensionless);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto p = g.node(i);
    f.values[i] = std::exp(-(p[0] * p[0] + p[1] * p[1]) / 2);
  }
  const auto lap = laplacian(f);
  double err = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto p = g.node(i);
    const double r2 = p[0] * p[0] + p[1] * p[1];
    err = std::max(err, std::abs(lap.values[i] - (r2 - 2) * std::exp(-r2 / 2)));
  }
  CHECK(err < 1e-8);
}

TEST_CASE("spectral derivative of a discontinuous field rings, finite differences do not") {
  const Grid g = oracle::grid1(2.0, 128);
  RealField step(g, FieldUnits::dimensionless);
  for (std::size_t i = 0; i < g.size(); ++i) step.values[i] = std::abs(g.node(i)[0]) < 0.5 ? 1.0 : 0.0;
  const auto spec = gradient(step)[0].values;
  // Far from the jumps the exact derivative is zero. Central differences
  // give exactly zero there; the spectral derivative has Gibbs ripples.
  double ripple = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.node(i)[0];
    if (std::abs(std::abs(x) - 0.5) > 0.2) ripple = std::max(ripple, std::abs(spec[i]));
  }
  CHECK(ripple > 1e-2);
}

TEST_CASE("transforms are linear, invertible and satisfy Parseval") {
  const Grid g = oracle::grid2(6.0, 16);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  std::vector<Complex> a(g.size()), b(g.size());
  for (auto& v : a) v = {n(rng), n(rng)};
  for (auto& v : b) v = {n(rng), n(rng)};
  std::vector<Complex> sum(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) sum[i] = 2.0 * a[i] - b[i];
  auto fa = a, fb = b, fs = sum;
  forward_transform(g, fa);
  forward_transform(g, fb);
  forward_transform(g, fs);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(fs[i] - (2.0 * fa[i] - fb[i])) < 1e-12);
  inverse_transform(g, fa);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(fa[i] - a[i]) < 1e-13);

  WaveField psi(g, a, 1.0, 1.0);
  CHECK(spectral_l2_norm(psi) == doctest::Approx(l2_norm(psi)).epsilon(1e-13));
  normalize(psi);
  CHECK(l2_norm(psi) == doctest::Approx(1.0).epsilon(1e-14));
  WaveField zero(g, std::vector<Complex>(g.size()), 1.0, 1.0);
  CHECK_THROWS_AS(normalize(zero), InvalidArgument);
}

TEST_CASE("spectral resampling is exact for band-limited data") {
  const Grid g = oracle::grid1(2 * pi, 32);
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = std::cos(2 * g.node(i)[0]) + 0.5 * std::sin(5 * g.node(i)[0]);
  std::vector<Point> pts{{0.123, 0}, {1.7, 0}, {-2.9, 0}};
  const auto r = resample_spectral(g, v, pts);
  for (std::size_t j = 0; j < pts.size(); ++j) {
    const double x = pts[j][0];
    CHECK(r[j] == doctest::Approx(std::cos(2 * x) + 0.5 * std::sin(5 * x)).epsilon(1e-12));
    const auto e = evaluate_spectral(g, v, pts[j]);
    CHECK(e.value == doctest::Approx(r[j]).epsilon(1e-12));
    CHECK(e.laplacian == doctest::Approx(-4 * std::cos(2 * x) - 12.5 * std::sin(5 * x)).epsilon(1e-10));
  }
}

TEST_CASE("multilinear interpolation reproduces bilinear data") {
  const Grid g = oracle::grid2(4.0, 16);
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto p = g.node(i);
    v[i] = 1 + 2 * p[0] - p[1] + 0.5 * p[0] * p[1];
  }
  double out = 0;
  REQUIRE(interpolate_multilinear(g, v, {}, Point{0.31, -0.77}, out));
  CHECK(out == doctest::Approx(1 + 0.62 + 0.77 - 0.5 * 0.31 * 0.77));
  CHECK_FALSE(interpolate_multilinear(g, v, {}, Point{1.9, 0.0}, out));
}
