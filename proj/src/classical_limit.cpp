#include "semiclassical/classical_limit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include "semiclassical/bohm.hpp"
#include "semiclassical/errors.hpp"

namespace semiclassical {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double dot(const Point& a, const Point& b) { return a[0] * b[0] + a[1] * b[1]; }

struct Scan {
  std::vector<double> values;
  std::size_t best = 0;
  bool multivalued = false;
};

// Local minima of the scanned values (1D or 2D lattice), non-strict with a
// lower-index tie rule so plateaus yield one entry.
bool is_local_min(const ScanGrid& sg, const std::vector<double>& v, std::size_t f) {
  const std::size_t n0 = sg.points[0];
  const std::size_t n1 = sg.dim == 2 ? sg.points[1] : 1;
  const std::size_t i = f / n1, j = f % n1;
  for (int di = -1; di <= 1; ++di) {
    for (int dj = -1; dj <= 1; ++dj) {
      if (di == 0 && dj == 0) continue;
      if (sg.dim == 1 && dj != 0) continue;
      const long ii = static_cast<long>(i) + di, jj = static_cast<long>(j) + dj;
      if (ii < 0 || jj < 0 || ii >= static_cast<long>(n0) || jj >= static_cast<long>(n1)) continue;
      const std::size_t q = static_cast<std::size_t>(ii) * n1 + static_cast<std::size_t>(jj);
      if (v[q] < v[f] || (v[q] == v[f] && q < f)) return false;
    }
  }
  return true;
}

std::size_t cell_distance(const ScanGrid& sg, std::size_t a, std::size_t b) {
  const std::size_t n1 = sg.dim == 2 ? sg.points[1] : 1;
  const auto d = [](std::size_t x, std::size_t y) { return x > y ? x - y : y - x; };
  return std::max(d(a / n1, b / n1), d(a % n1, b % n1));
}

bool lexicographically_smaller(const Point& a, const Point& b) {
  if (a[0] != b[0]) return a[0] < b[0];
  return a[1] < b[1];
}

Scan scan(const ScanGrid& sg, const std::vector<Point>& nodes, std::vector<double> values, double tie_tolerance) {
  Scan out;
  out.values = std::move(values);
  out.best = static_cast<std::size_t>(std::min_element(out.values.begin(), out.values.end()) - out.values.begin());
  const double best = out.values[out.best];
  const double tol = tie_tolerance * std::max(1.0, std::abs(best));
  std::size_t chosen = out.best;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (k == out.best || out.values[k] - best >= tol) continue;
    if (cell_distance(sg, k, out.best) <= 2 || !is_local_min(sg, out.values, k)) continue;
    out.multivalued = true;
    if (lexicographically_smaller(nodes[k], nodes[chosen])) chosen = k;
  }
  out.best = chosen;
  return out;
}

bool on_scan_boundary(const ScanGrid& sg, std::size_t f) {
  const std::size_t n1 = sg.dim == 2 ? sg.points[1] : 1;
  const std::size_t i = f / n1, j = f % n1;
  if (i == 0 || i + 1 == sg.points[0]) return true;
  return sg.dim == 2 && (j == 0 || j + 1 == n1);
}

Point clamp_to(const ScanGrid& sg, Point x) {
  for (std::size_t a = 0; a < sg.dim; ++a) x[a] = std::clamp(x[a], sg.lower[a], sg.upper[a]);
  return x;
}

// Newton iteration on finite-difference paraboloid fits around c.
std::pair<Point, double> refine_2d(const ScanGrid& sg, const std::function<double(const Point&)>& f, Point c,
                                   double fc) {
  double h[2] = {sg.spacing(0), sg.spacing(1)};
  const double h_min[2] = {1e-10 * (sg.upper[0] - sg.lower[0]), 1e-10 * (sg.upper[1] - sg.lower[1])};
  for (int iter = 0; iter < 200; ++iter) {
    double v[3][3];
    Point best = c;
    double fbest = fc;
    for (int i = -1; i <= 1; ++i) {
      for (int j = -1; j <= 1; ++j) {
        if (i == 0 && j == 0) {
          v[1][1] = fc;
          continue;
        }
        const Point p = clamp_to(sg, {c[0] + i * h[0], c[1] + j * h[1]});
        v[i + 1][j + 1] = f(p);
        if (v[i + 1][j + 1] < fbest) {
          fbest = v[i + 1][j + 1];
          best = p;
        }
      }
    }
    const double gx = (v[2][1] - v[0][1]) / (2 * h[0]);
    const double gy = (v[1][2] - v[1][0]) / (2 * h[1]);
    const double hxx = (v[2][1] - 2 * fc + v[0][1]) / (h[0] * h[0]);
    const double hyy = (v[1][2] - 2 * fc + v[1][0]) / (h[1] * h[1]);
    const double hxy = (v[2][2] - v[2][0] - v[0][2] + v[0][0]) / (4 * h[0] * h[1]);
    const double det = hxx * hyy - hxy * hxy;
    Point step{0.0, 0.0};
    bool newton = false;
    if (hxx > 0 && det > 0) {
      step = {-(hyy * gx - hxy * gy) / det, -(hxx * gy - hxy * gx) / det};
      newton = std::abs(step[0]) <= 2 * h[0] && std::abs(step[1]) <= 2 * h[1];
    }
    if (newton) {
      const Point p = clamp_to(sg, {c[0] + step[0], c[1] + step[1]});
      const double fp = f(p);
      if (fp < fbest) {
        fbest = fp;
        best = p;
      }
    }
    const bool moved = fbest < fc;
    const Point delta{best[0] - c[0], best[1] - c[1]};
    c = best;
    fc = fbest;
    for (int a = 0; a < 2; ++a) {
      // Shrink toward the size of the last move; keep the step when the
      // minimum is still being chased across the stencil.
      const double target = newton ? std::max(4.0 * std::abs(delta[a]), h[a] / 16.0) : (moved ? h[a] : h[a] / 4.0);
      h[a] = std::max(std::min(h[a], target), h_min[a]);
    }
    if (h[0] <= h_min[0] && h[1] <= h_min[1] && !moved) break;
  }
  return {c, fc};
}

}  // namespace

ScanGrid ScanGrid::line(double lower, double upper, std::size_t points) {
  if (!(upper > lower) || points < 3) throw InvalidArgument("scan grid needs upper > lower and >= 3 points");
  return ScanGrid{1, {lower, 0.0}, {upper, 0.0}, {points, 1}};
}

ScanGrid ScanGrid::box(const Point& lower, const Point& upper, std::size_t points0, std::size_t points1) {
  if (!(upper[0] > lower[0]) || !(upper[1] > lower[1]) || points0 < 3 || points1 < 3) {
    throw InvalidArgument("scan grid needs upper > lower and >= 3 points per axis");
  }
  return ScanGrid{2, lower, upper, {points0, points1}};
}

double ScanGrid::spacing(std::size_t axis) const {
  return (upper[axis] - lower[axis]) / static_cast<double>(points[axis] - 1);
}

Point ScanGrid::node(std::size_t flat) const {
  const std::size_t n1 = dim == 2 ? points[1] : 1;
  const std::size_t i = flat / n1, j = flat % n1;
  Point p{lower[0] + static_cast<double>(i) * spacing(0), 0.0};
  if (dim == 2) p[1] = lower[1] + static_cast<double>(j) * spacing(1);
  return p;
}

MinPlusSolution hopf_lax_solve(const ScalarFunction& s0, const PotentialSpec& potential, double t, const Grid& grid,
                               const ScanGrid& x0_grid, const HopfLaxOptions& options) {
  if (!(t > 0)) throw InvalidArgument("hopf_lax_solve needs t > 0");
  if (x0_grid.dim != grid.dim()) throw InvalidArgument("scan grid and field grid dimensions differ");
  // Surfaces caustics and unsupported potentials before the scan.
  (void)classical_action(potential, grid.node(0), t, x0_grid.node(0));

  const std::size_t n = grid.size();
  MinPlusSolution out{grid, t, RealField(grid, FieldUnits::action), std::vector<Point>(n),
                      std::vector<std::uint8_t>(n, 0), std::vector<std::uint8_t>(n, 0), 0};
  std::vector<Point> nodes(x0_grid.size());
  std::vector<double> s0_values(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    nodes[k] = x0_grid.node(k);
    s0_values[k] = s0(nodes[k]);
  }

  for (std::size_t f = 0; f < n; ++f) {
    const Point x = grid.node(f);
    auto objective = [&](const Point& x0) { return s0(x0) + classical_action(potential, x, t, x0); };
    std::vector<double> values(nodes.size());
    for (std::size_t k = 0; k < nodes.size(); ++k) values[k] = s0_values[k] + classical_action(potential, x, t, nodes[k]);
    Scan sc = scan(x0_grid, nodes, std::move(values), options.tie_tolerance);
    Point arg = nodes[sc.best];
    double value = sc.values[sc.best];
    if (options.refine) {
      if (x0_grid.dim == 1) {
        const double h = x0_grid.spacing(0);
        const double a = std::max(x0_grid.lower[0], arg[0] - h);
        const double b = std::min(x0_grid.upper[0], arg[0] + h);
        auto line = [&](double y) { return objective(Point{y, 0.0}); };
        const auto r = boost::math::tools::brent_find_minima(line, a, b, std::numeric_limits<double>::digits / 2);
        if (r.second <= value) {
          arg = {r.first, 0.0};
          value = r.second;
        }
        // Brent stops near sqrt(eps) in x; parabolic steps on a short
        // stencil take the argmin to rounding level.
        for (int it = 0; it < 3; ++it) {
          const double d = 1e-3 * h;
          const double fm = line(arg[0] - d), fp = line(arg[0] + d);
          const double curv = fp - 2.0 * value + fm;
          if (!(curv > 0)) break;
          const double y = std::clamp(arg[0] - 0.5 * d * (fp - fm) / curv, x0_grid.lower[0], x0_grid.upper[0]);
          const double fy = line(y);
          if (!(fy <= value)) break;
          const bool done = std::abs(y - arg[0]) < 1e-15 * std::max(1.0, std::abs(y));
          arg[0] = y;
          value = fy;
          if (done) break;
        }
      } else {
        const auto r = refine_2d(x0_grid, objective, arg, value);
        arg = r.first;
        value = r.second;
      }
    }
    out.S.values[f] = value;
    out.argmin[f] = arg;
    out.multivalued[f] = sc.multivalued ? 1 : 0;
    out.boundary[f] = on_scan_boundary(x0_grid, sc.best) ? 1 : 0;
    out.multivalued_count += sc.multivalued ? 1 : 0;
  }
  return out;
}

ScalarFunction cubic_interpolant(const RealField& field) {
  const Grid grid = field.grid;
  const std::vector<double> values = field.values;
  return [grid, values](const Point& x) {
    std::array<std::size_t, kMaxDim> start{0, 0};
    std::array<std::array<double, 4>, kMaxDim> w{};
    for (std::size_t a = 0; a < grid.dim(); ++a) {
      const double s = (x[a] - grid.lower(a)) / grid.spacing(a);
      const double last = static_cast<double>(grid.points(a) - 1);
      if (!(s >= -1e-9 && s <= last + 1e-9)) throw InvalidArgument("interpolation point outside the grid nodes");
      const auto i = static_cast<std::size_t>(std::clamp(std::floor(s), 1.0, last - 2.0)) - 1;
      start[a] = i;
      for (int p = 0; p < 4; ++p) {
        double l = 1.0;
        for (int q = 0; q < 4; ++q) {
          if (q != p) l *= (s - static_cast<double>(i + q)) / static_cast<double>(p - q);
        }
        w[a][p] = l;
      }
    }
    if (grid.dim() == 1) {
      double r = 0;
      for (int p = 0; p < 4; ++p) r += w[0][p] * values[start[0] + p];
      return r;
    }
    double r = 0;
    for (int p = 0; p < 4; ++p) {
      for (int q = 0; q < 4; ++q) r += w[0][p] * w[1][q] * values[grid.flat_index(start[0] + p, start[1] + q)];
    }
    return r;
  };
}

MinPlusSolution hopf_lax_solve(const RealField& s0, const PotentialSpec& potential, double t,
                               const ScanGrid& x0_grid, const HopfLaxOptions& options) {
  const Grid& g = s0.grid;
  for (std::size_t a = 0; a < x0_grid.dim; ++a) {
    const double hi = g.coordinate(a, g.points(a) - 1);
    if (x0_grid.lower[a] < g.lower(a) || x0_grid.upper[a] > hi) {
      throw InvalidArgument("scan grid extends beyond the nodes of the initial action");
    }
  }
  return hopf_lax_solve(cubic_interpolant(s0), potential, t, g, x0_grid, options);
}

namespace {

// Excluded: edge nodes and nodes with a flagged node in their 3x3 block.
std::vector<std::uint8_t> interior_mask(const Grid& g, const std::vector<const MinPlusSolution*>& sols) {
  std::vector<std::uint8_t> ok(g.size(), 1);
  for (std::size_t f = 0; f < g.size(); ++f) {
    const auto idx = g.multi_index(f);
    for (std::size_t a = 0; a < g.dim(); ++a) {
      if (idx[a] == 0 || idx[a] + 1 == g.points(a)) ok[f] = 0;
    }
  }
  for (const auto* s : sols) {
    for (std::size_t f = 0; f < g.size(); ++f) {
      if (!s->multivalued[f] && !s->boundary[f]) continue;
      const auto idx = g.multi_index(f);
      const long lo0 = static_cast<long>(idx[0]) - 1, hi0 = static_cast<long>(idx[0]) + 1;
      const long lo1 = g.dim() == 2 ? static_cast<long>(idx[1]) - 1 : 0;
      const long hi1 = g.dim() == 2 ? static_cast<long>(idx[1]) + 1 : 0;
      for (long i = std::max(0L, lo0); i <= std::min(hi0, static_cast<long>(g.points(0)) - 1); ++i) {
        for (long j = std::max(0L, lo1); j <= (g.dim() == 2 ? std::min(hi1, static_cast<long>(g.points(1)) - 1) : 0);
             ++j) {
          ok[g.flat_index(static_cast<std::size_t>(i), static_cast<std::size_t>(j))] = 0;
        }
      }
    }
  }
  return ok;
}

}  // namespace

RealField hj_residual(const MinPlusSolution& before, const MinPlusSolution& at, const MinPlusSolution& after,
                      const PotentialSpec& potential) {
  if (!(before.grid == at.grid) || !(at.grid == after.grid)) throw InvalidArgument("solutions on different grids");
  const double dt = at.time - before.time;
  if (!(dt > 0) || std::abs((after.time - at.time) - dt) > 1e-9 * dt) {
    throw InvalidArgument("hj_residual needs three equally spaced increasing times");
  }
  const Grid& g = at.grid;
  const auto ok = interior_mask(g, {&before, &at, &after});
  RealField out(g, std::vector<double>(g.size(), kNaN), FieldUnits::energy);
  const double m = potential.mass();
  for (std::size_t f = 0; f < g.size(); ++f) {
    if (!ok[f]) continue;
    double grad2 = 0;
    for (std::size_t a = 0; a < g.dim(); ++a) {
      const std::size_t s = g.stride(a);
      const double d = (at.S.values[f + s] - at.S.values[f - s]) / (2.0 * g.spacing(a));
      grad2 += d * d;
    }
    const double dsdt = (after.S.values[f] - before.S.values[f]) / (2.0 * dt);
    out.values[f] = dsdt + grad2 / (2.0 * m) + potential.value(g.node(f), at.time);
  }
  return out;
}

std::vector<Point> characteristic_momentum(const MinPlusSolution& sol, const PotentialSpec& potential) {
  std::vector<Point> out(sol.grid.size());
  for (std::size_t f = 0; f < out.size(); ++f) {
    out[f] = classical_action_gradient(potential, sol.grid.node(f), sol.time, sol.argmin[f]);
  }
  return out;
}

RealField transport_density(const MinPlusSolution& sol, const ScalarFunction& rho0) {
  const Grid& g = sol.grid;
  const auto ok = interior_mask(g, {&sol});
  RealField out(g, std::vector<double>(g.size(), kNaN), FieldUnits::dimensionless);
  for (std::size_t f = 0; f < g.size(); ++f) {
    if (!ok[f]) continue;
    double jac[2][2] = {{1, 0}, {0, 1}};
    for (std::size_t a = 0; a < g.dim(); ++a) {
      const std::size_t s = g.stride(a);
      for (std::size_t b = 0; b < g.dim(); ++b) {
        jac[b][a] = (sol.argmin[f + s][b] - sol.argmin[f - s][b]) / (2.0 * g.spacing(a));
      }
    }
    const double det = g.dim() == 1 ? jac[0][0] : jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
    out.values[f] = rho0(sol.argmin[f]) * std::abs(det);
  }
  return out;
}

VectorFunction velocity_from_action(const ScalarFunction& s0, double mass, double step) {
  if (!(mass > 0) || !(step > 0)) throw InvalidArgument("velocity_from_action needs positive mass and step");
  return [s0, mass, step](const Point& x) {
    Point v{0.0, 0.0};
    for (std::size_t a = 0; a < kMaxDim; ++a) {
      auto at = [&](double d) {
        Point y = x;
        y[a] += d;
        return s0(y);
      };
      v[a] = (-at(2 * step) + 8 * at(step) - 8 * at(-step) + at(-2 * step)) / (12 * step * mass);
    }
    return v;
  };
}

TrajectoryEnsemble classical_ensemble(const std::vector<Point>& initial, const VectorFunction& initial_velocity,
                                      const PotentialSpec& potential, std::size_t dim,
                                      const std::vector<double>& times) {
  if (times.empty() || times.front() != 0.0) throw InvalidArgument("classical ensemble times must start at 0");
  TrajectoryEnsemble out(dim, TrajectoryKind::classical, times, initial.size());
  for (std::size_t p = 0; p < initial.size(); ++p) {
    Point v0 = initial_velocity(initial[p]);
    if (dim == 1) v0[1] = 0.0;
    const auto path = classical_trajectory(potential, dim, initial[p], v0, times);
    for (std::size_t k = 0; k < times.size(); ++k) out.set(k, p, path.position(k, 0), path.velocity(k, 0));
  }
  return out;
}

RealField histogram_density(const TrajectoryEnsemble& ensemble, std::size_t time_index, const Grid& grid) {
  if (ensemble.dim() != grid.dim()) throw InvalidArgument("ensemble and grid dimensions differ");
  RealField out(grid, FieldUnits::density);
  const std::size_t n = ensemble.particle_count();
  if (n == 0) return out;
  const double w = 1.0 / (static_cast<double>(n) * grid.cell_volume());
  for (std::size_t p = 0; p < n; ++p) {
    const auto at = ensemble.absorbed_at(p);
    if (at && *at <= time_index) continue;
    const Point x = ensemble.position(time_index, p);
    std::array<std::size_t, kMaxDim> idx{0, 0};
    bool inside = true;
    for (std::size_t a = 0; a < grid.dim(); ++a) {
      const double s = std::round((x[a] - grid.lower(a)) / grid.spacing(a));
      if (s < 0 || s >= static_cast<double>(grid.points(a))) inside = false;
      else idx[a] = static_cast<std::size_t>(s);
    }
    if (inside) out.values[grid.flat_index(idx[0], idx[1])] += w;
  }
  return out;
}

ClassicalDensity evolve_classical_density(const RealField& rho0, const VectorFunction& initial_velocity,
                                          const PotentialSpec& potential, const std::vector<double>& times,
                                          std::size_t n, std::uint64_t seed) {
  const auto initial = sample_initial_positions(rho0, n, seed);
  ClassicalDensity out{times, {}, "characteristics_histogram",
                       classical_ensemble(initial, initial_velocity, potential, rho0.grid.dim(), times)};
  for (std::size_t k = 0; k < times.size(); ++k) out.rho.push_back(histogram_density(out.particles, k, rho0.grid));
  return out;
}

double DeterministSolution::action(std::size_t k, const Point& x) const {
  return mass * (xi_dot.at(k)[0] * x[0] + xi_dot[k][1] * x[1]) + g[k];
}

DeterministSolution determinist_solution(const PotentialSpec& potential, std::size_t dim, const Point& x0,
                                         const Point& v0, const std::vector<double>& times) {
  if (potential.kind() != PotentialKind::harmonic) {
    throw UnsupportedPotential("the determinist action g(t) is defined for the harmonic oscillator only");
  }
  const double m = potential.mass();
  const double w = potential.omega();
  auto path = [&](double s) { return classical_state(potential, dim, x0, v0, s); };
  auto integrand = [&](double s) {
    const auto st = path(s);
    return -0.5 * m * dot(st.v, st.v) + 0.5 * m * w * w * dot(st.x, st.x);
  };
  auto g_at = [&](double t) {
    using boost::math::quadrature::gauss_kronrod;
    if (t == 0.0) return 0.0;
    if (t < 0.0) return -gauss_kronrod<double, 31>::integrate(integrand, t, 0.0, 20, 1e-15);
    return gauss_kronrod<double, 31>::integrate(integrand, 0.0, t, 20, 1e-15);
  };
  auto s_at = [&](const Point& x, double t) {
    const auto st = path(t);
    return m * dot(st.v, x) + g_at(t);
  };

  DeterministSolution out;
  out.mass = m;
  out.times = times;
  for (double t : times) {
    const auto st = path(t);
    const double g = g_at(t);
    out.xi.push_back(st.x);
    out.xi_dot.push_back(st.v);
    out.g.push_back(g);
    out.action_on_path.push_back(m * dot(st.v, st.x) + g);
    // Fourth-order central difference of S(xi(t), .) in time at fixed x.
    const double h = 1e-3;
    const double dsdt = (-s_at(st.x, t + 2 * h) + 8 * s_at(st.x, t + h) - 8 * s_at(st.x, t - h) +
                         s_at(st.x, t - 2 * h)) /
                        (12 * h);
    Point grad{0.0, 0.0};
    for (std::size_t a = 0; a < dim; ++a) {
      Point lo = st.x, hi = st.x;
      lo[a] -= h;
      hi[a] += h;
      grad[a] = (s_at(hi, t) - s_at(lo, t)) / (2 * h);
    }
    out.hj_residual.push_back(dsdt + 0.5 * dot(grad, grad) / m + potential.value(st.x, t));
    const Point dv{st.v[0] - grad[0] / m, st.v[1] - grad[1] / m};
    out.velocity_residual.push_back(std::sqrt(dot(dv, dv)));
  }
  return out;
}

}  // namespace semiclassical
