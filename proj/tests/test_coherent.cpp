#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "semiclassical/coherent.hpp"
#include "semiclassical/errors.hpp"
#include "semiclassical/statistics.hpp"

using namespace semiclassical;
using std::numbers::pi;

namespace {

Complex psi_at(const CoherentState& cs, const Point& x, double t) {
  return std::polar(std::sqrt(cs.density(x, t)), cs.action(x, t) / cs.hbar());
}

}  // namespace

TEST_CASE("width and normalization") {
  const CoherentState cs(1, 2.0, 0.5, 0.3, Point{0.4, 0}, Point{-1.0, 0});
  CHECK(std::abs(cs.sigma_hbar() - std::sqrt(0.3 / 2.0)) < 1e-14);
  const double s = cs.sigma_hbar();
  CHECK(cs.density(cs.xi(0.7), 0.7) == doctest::Approx(1 / std::sqrt(2 * pi * s * s)).epsilon(1e-14));
  const double mass = oracle::simpson([&](double x) { return cs.density(Point{x, 0}, 0.7); }, -6, 6, 4000);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));

  const CoherentState two(2, 1.0, 1.0, 1.0, Point{0, 0}, Point{0, 0});
  CHECK(two.density(Point{0, 0}, 0) == doctest::Approx(1 / (2 * pi * 0.5)).epsilon(1e-14));
  const CoherentState half(1, 2.0, 0.5, 0.15, Point{0.4, 0}, Point{-1.0, 0});
  CHECK(half.sigma_hbar() * half.sigma_hbar() == doctest::Approx(0.5 * s * s).epsilon(1e-14));
}

TEST_CASE("closed form solves the Schrodinger equation pointwise") {
  for (std::size_t dim : {1u, 2u}) {
    const double m = 1.3, w = 0.9, hbar = 0.4;
    const CoherentState cs(dim, w, m, hbar, Point{0.8, -0.5}, Point{0.3, 0.6});
    const double h = 1e-3, dt = 1e-4;
    for (double t : {0.2, 1.1, 2.9}) {
      const Point c = cs.xi(t);
      for (double dx : {-0.3, 0.0, 0.25}) {
        const Point x{c[0] + dx, dim == 2 ? c[1] - 0.5 * dx : 0.0};
        const Complex p0 = psi_at(cs, x, t);
        const Complex dpdt = (psi_at(cs, x, t + dt) - psi_at(cs, x, t - dt)) / (2 * dt);
        Complex lap = 0;
        for (std::size_t a = 0; a < dim; ++a) {
          Point xp = x, xm = x;
          xp[a] += h;
          xm[a] -= h;
          lap += (psi_at(cs, xp, t) - 2.0 * p0 + psi_at(cs, xm, t)) / (h * h);
        }
        const double v = 0.5 * m * w * w * (x[0] * x[0] + x[1] * x[1]);
        const Complex lhs = Complex(0, hbar) * dpdt;
        const Complex rhs = -(hbar * hbar / (2 * m)) * lap + v * p0;
        CHECK(std::abs(lhs - rhs) / std::abs(p0) < 1e-5);
      }
    }
  }
}

TEST_CASE("action at t = 0 and the zero-point phase") {
  const CoherentState cs(1, 1.0, 2.0, 1.0, Point{0.5, 0}, Point{1.5, 0});
  CHECK(cs.action(Point{0.7, 0}, 0.0) == doctest::Approx(2.0 * 1.5 * 0.7));
  CHECK(cs.g(0.0) == 0.0);
  const CoherentState rest(2, 1.0, 1.0, 1.0, Point{0, 0}, Point{0, 0});
  for (double t : {0.5, 2.0, 4.0}) CHECK(rest.action(Point{0.3, -0.2}, t) == doctest::Approx(-t));
}

TEST_CASE("g closed form matches quadrature") {
  const CoherentState cs(2, 1.7, 0.8, 1.0, Point{1.0, -0.4}, Point{0.2, 0.9});
  for (double t : {0.1, 1.0, 2.5, 7.0}) {
    CHECK(cs.g(t) == doctest::Approx(cs.g_quadrature(t)).epsilon(1e-12));
    auto integrand = [&](double s) {
      const Point p = cs.xi(s), v = cs.xi_dot(s);
      return 0.4 * (-(v[0] * v[0] + v[1] * v[1]) + 1.7 * 1.7 * (p[0] * p[0] + p[1] * p[1]));
    };
    CHECK(cs.g(t) == doctest::Approx(oracle::simpson(integrand, 0, t, 2000)).epsilon(1e-10));
  }
}

TEST_CASE("oscillator relation: equal magnitude, opposite sign") {
  const CoherentState cs(2, 1.3, 2.0, 1.0, Point{1.0, 0.5}, Point{-0.3, 0.4});
  for (double t : {0.0, 0.4, 1.9}) {
    const auto id = cs.identity(t);
    CHECK(id.two_potential == doctest::Approx(-id.mass_accel_dot_xi));
    const Point p = cs.xi(t);
    CHECK(id.two_potential == doctest::Approx(2.0 * 1.3 * 1.3 * (p[0] * p[0] + p[1] * p[1])));
  }
}

TEST_CASE("quantum potential on and off the path") {
  const double hbar = 0.6, w = 1.4, m = 0.9;
  const CoherentState cs(2, w, m, hbar, Point{1.0, 0.0}, Point{0.0, 1.0});
  for (int k = 0; k < 5; ++k) {
    const double t = 0.37 * k;
    CHECK(cs.quantum_potential(cs.xi(t), t) == doctest::Approx(hbar * w));
  }
  // Q = -(hbar^2 / 2m) lap sqrt(rho) / sqrt(rho) by finite differences.
  const double t = 0.8, h = 1e-4;
  const Point c = cs.xi(t);
  const Point x{c[0] + 0.3, c[1] - 0.2};
  auto amp = [&](const Point& p) { return std::sqrt(cs.density(p, t)); };
  double lap = 0;
  for (int a = 0; a < 2; ++a) {
    Point xp = x, xm = x;
    xp[a] += h;
    xm[a] -= h;
    lap += (amp(xp) - 2 * amp(x) + amp(xm)) / (h * h);
  }
  CHECK(cs.quantum_potential(x, t) == doctest::Approx(-(hbar * hbar / (2 * m)) * lap / amp(x)).epsilon(1e-6));
}

TEST_CASE("velocity field and spin term") {
  const CoherentState cs(2, 1.0, 1.0, 1.0, Point{1.0, 0.0}, Point{0.0, 1.0});
  const Point x{0.5, 0.2};
  const Point v = cs.velocity(x, 0.3);
  CHECK(v[0] == doctest::Approx(cs.xi_dot(0.3)[0]));
  const Point up = cs.velocity(x, 0.3, SpinAxis{0, 0, 1});
  const Point down = cs.velocity(x, 0.3, SpinAxis{0, 0, -1});
  CHECK(up[0] + down[0] == doctest::Approx(2 * v[0]));
  CHECK(up[0] != doctest::Approx(v[0]));
  const CoherentState one(1, 1.0, 1.0, 1.0, Point{1.0, 0}, Point{0, 0});
  CHECK_THROWS_AS(one.velocity(Point{0, 0}, 0, SpinAxis{0, 0, 1}), SpinAxisUnsupported);
}

TEST_CASE("weak convergence of the density to the path is first order in hbar") {
  std::vector<double> hbars, errors;
  for (double hbar : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const CoherentState cs(1, 1.0, 1.0, hbar, Point{1.0, 0}, Point{0.5, 0});
    const double t = 1.3;
    const Point c = cs.xi(t);
    const double s = cs.sigma_hbar();
    auto f = [](double x) { return 1.0 / (1.0 + x * x); };
    const double integral =
        oracle::simpson([&](double x) { return f(x) * cs.density(Point{x, 0}, t); }, c[0] - 12 * s, c[0] + 12 * s, 4000);
    hbars.push_back(hbar);
    errors.push_back(std::abs(integral - f(c[0])));
  }
  const auto fit = fit_loglog(hbars, errors);
  CHECK(fit.slope == doctest::Approx(1.0).epsilon(0.02));
}
