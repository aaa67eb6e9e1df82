#pragma once

// Independent reference computations for the tests. None of these call the
// library's solvers.

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "semiclassical/grid.hpp"

namespace oracle {

using semiclassical::Grid;
using semiclassical::Point;

inline Grid grid1(double extent, std::size_t n) {
  std::vector<double> e{extent};
  std::vector<std::size_t> p{n};
  return Grid(1, e, p);
}

inline Grid grid2(double extent, std::size_t n) {
  std::vector<double> e{extent, extent};
  std::vector<std::size_t> p{n, n};
  return Grid(2, e, p);
}

// Action of the straight-line discretized path for V = m w^2 x^2 / 2 (or
// free with w = 0): minimize sum_j [m (x_{j+1} - x_j)^2 / (2 h) - h V(x_j)]
// with x_0 = a, x_n = b. The stationarity conditions are a tridiagonal
// system, solved here by the Thomas algorithm; the action converges to the
// exact extremal action as O(h^2) (Richardson extrapolated by the caller).
inline double discrete_action(double mass, double omega, double a, double b, double t, std::size_t n) {
  const double h = t / static_cast<double>(n);
  const double k = mass * omega * omega;
  // Interior unknowns x_1..x_{n-1}:
  // (m/h)(2 x_j - x_{j-1} - x_{j+1}) - h k x_j = 0 with trapezoid weights.
  const std::size_t m = n - 1;
  std::vector<double> diag(m, 2.0 * mass / h - h * k), off(m, -mass / h), rhs(m, 0.0);
  rhs.front() += mass / h * a;
  rhs.back() += mass / h * b;
  std::vector<double> c(m), d(m);
  c[0] = off[0] / diag[0];
  d[0] = rhs[0] / diag[0];
  for (std::size_t i = 1; i < m; ++i) {
    const double den = diag[i] - off[i] * c[i - 1];
    c[i] = off[i] / den;
    d[i] = (rhs[i] - off[i] * d[i - 1]) / den;
  }
  std::vector<double> x(n + 1);
  x[0] = a;
  x[n] = b;
  x[m] = d[m - 1];
  for (std::size_t i = m - 1; i-- > 0;) x[i + 1] = d[i] - c[i] * x[i + 2];
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double dx = x[j + 1] - x[j];
    const double vj = 0.5 * k * x[j] * x[j];
    const double vj1 = 0.5 * k * x[j + 1] * x[j + 1];
    s += mass * dx * dx / (2.0 * h) - h * 0.5 * (vj + vj1);
  }
  return s;
}

inline double richardson_action(double mass, double omega, double a, double b, double t) {
  const double coarse = discrete_action(mass, omega, a, b, t, 2000);
  const double fine = discrete_action(mass, omega, a, b, t, 4000);
  return (4.0 * fine - coarse) / 3.0;
}

// Shooting: the initial velocity that lands at b at time t, found by
// bisection on an RK4 integration of x'' = -w^2 x - f/m... here only the
// oscillator/free case with optional constant force.
inline double rk4_endpoint(double omega, double force_over_m, double x0, double v0, double t, std::size_t n) {
  const double h = t / static_cast<double>(n);
  double x = x0, v = v0;
  auto acc = [&](double y) { return -omega * omega * y + force_over_m; };
  for (std::size_t i = 0; i < n; ++i) {
    const double k1x = v, k1v = acc(x);
    const double k2x = v + 0.5 * h * k1v, k2v = acc(x + 0.5 * h * k1x);
    const double k3x = v + 0.5 * h * k2v, k3v = acc(x + 0.5 * h * k2x);
    const double k4x = v + h * k3v, k4v = acc(x + h * k3x);
    x += h / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x);
    v += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
  }
  return x;
}

inline double shoot_velocity(double omega, double force_over_m, double a, double b, double t) {
  // The endpoint is affine in v0, so two shots determine it.
  const double e0 = rk4_endpoint(omega, force_over_m, a, 0.0, t, 4000);
  const double e1 = rk4_endpoint(omega, force_over_m, a, 1.0, t, 4000);
  return (b - e0) / (e1 - e0);
}

// Exhaustive minimization of f over [lo, hi]: dense scan then repeated
// zooming around the best sample.
inline double brute_force_min(const std::function<double(double)>& f, double lo, double hi, double& arg) {
  double best = INFINITY;
  double best_x = lo;
  std::size_t n = 20001;
  for (int round = 0; round < 8; ++round) {
    const double h = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = lo + h * static_cast<double>(i);
      const double v = f(x);
      if (v < best) {
        best = v;
        best_x = x;
      }
    }
    lo = best_x - 2.0 * h;
    hi = best_x + 2.0 * h;
    n = 401;
  }
  arg = best_x;
  return best;
}

// Composite Simpson rule on [a, b] with n (even) intervals.
inline double simpson(const std::function<double(double)>& f, double a, double b, std::size_t n) {
  const double h = (b - a) / static_cast<double>(n);
  double s = f(a) + f(b);
  for (std::size_t i = 1; i < n; ++i) s += f(a + h * static_cast<double>(i)) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace oracle
