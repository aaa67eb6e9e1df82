#include "semiclassical/bohm.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "semiclassical/errors.hpp"

namespace semiclassical {
namespace {

// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

VelocityFieldSample velocity_field(const MadelungFields& fields, const std::optional<SpinAxis>& spin,
                                   const RealField* absorbing_mask) {
  const Grid& g = fields.grid;
  const std::size_t n = g.size();
  double orientation = 0.0;
  if (spin) orientation = spin_orientation(*spin, g.dim());
  if (absorbing_mask && !(absorbing_mask->grid == g)) throw InvalidArgument("absorbing mask grid does not match");

  VelocityFieldSample out{g, fields.time, std::vector<std::vector<double>>(g.dim(), std::vector<double>(n, 0.0)),
                          fields.valid};
  if (absorbing_mask) {
    for (std::size_t f = 0; f < n; ++f) {
      if (absorbing_mask->values[f] < 1.0) out.valid[f] = 0;
    }
  }
  const double inv_m = 1.0 / fields.mass;
  const double spin_scale = fields.hbar / (2.0 * fields.mass) * orientation;
  for (std::size_t f = 0; f < n; ++f) {
    if (!out.valid[f]) continue;
    for (std::size_t a = 0; a < g.dim(); ++a) out.components[a][f] = fields.action_gradient[a].values[f] * inv_m;
    if (spin) {
      const double rho = fields.rho.values[f];
      const double ax = fields.density_gradient[0].values[f] / rho;
      const double ay = fields.density_gradient[1].values[f] / rho;
      out.components[0][f] += spin_scale * ay;
      out.components[1][f] -= spin_scale * ax;
    }
  }
  return out;
}

bool interpolate_velocity(const VelocityFieldSample& field, const Point& x, Point& v) {
  CellWeights cw;
  if (!locate_cell(field.grid, x, cw)) return false;
  v = {0.0, 0.0};
  for (std::size_t c = 0; c < cw.count; ++c) {
    const std::size_t node = cw.nodes[c];
    if (!field.valid[node]) return false;
    for (std::size_t a = 0; a < field.grid.dim(); ++a) v[a] += cw.weights[c] * field.components[a][node];
  }
  return true;
}

std::vector<Point> sample_initial_positions(const RealField& rho0, std::size_t n, std::uint64_t seed,
                                            double rho_floor_relative) {
  std::vector<Point> out;
  if (n == 0) return out;
  const Grid& g = rho0.grid;
  const auto& rho = rho0.values;
  const double rho_max = *std::max_element(rho.begin(), rho.end());
  if (!(rho_max > 0)) throw SamplingError("cannot sample from a zero density");
  std::mt19937_64 rng(seed);
  out.reserve(n);

  if (g.dim() == 1) {
    const std::size_t m = g.points(0);
    const double dx = g.spacing(0);
    std::vector<double> cdf(m, 0.0);  // mass left of node i
    for (std::size_t i = 1; i < m; ++i) cdf[i] = cdf[i - 1] + 0.5 * dx * (rho[i - 1] + rho[i]);
    const double total = cdf.back();
    for (std::size_t p = 0; p < n; ++p) {
      const double target = uniform01(rng) * total;
      auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
      std::size_t i = static_cast<std::size_t>(std::distance(cdf.begin(), it));
      i = std::clamp<std::size_t>(i, 1, m - 1) - 1;
      // Invert the quadratic mass of the linear density on [x_i, x_{i+1}].
      const double r = target - cdf[i];
      const double slope = (rho[i + 1] - rho[i]) / dx;
      const double disc = std::max(0.0, rho[i] * rho[i] + 2.0 * slope * r);
      const double denom = rho[i] + std::sqrt(disc);
      double s = denom > 0 ? 2.0 * r / denom : 0.5 * dx;
      s = std::clamp(s, 0.0, dx);
      out.push_back({g.coordinate(0, i) + s, 0.0});
    }
    return out;
  }

  const double floor = rho_floor_relative * rho_max;
  std::array<std::size_t, 2> lo{g.points(0), g.points(1)}, hi{0, 0};
  for (std::size_t f = 0; f < g.size(); ++f) {
    if (rho[f] < floor) continue;
    const auto idx = g.multi_index(f);
    for (std::size_t a = 0; a < 2; ++a) {
      lo[a] = std::min(lo[a], idx[a]);
      hi[a] = std::max(hi[a], idx[a]);
    }
  }
  Point box_lo{}, box_span{};
  for (std::size_t a = 0; a < 2; ++a) {
    const std::size_t l = lo[a] > 0 ? lo[a] - 1 : 0;
    const std::size_t h = std::min(hi[a] + 1, g.points(a) - 1);
    box_lo[a] = g.coordinate(a, l);
    box_span[a] = g.coordinate(a, h) - box_lo[a];
  }
  const std::size_t max_attempts = 100000 + 2000 * n;
  std::size_t attempts = 0;
  while (out.size() < n) {
    if (++attempts > max_attempts) {
      std::ostringstream msg;
      msg << "rejection sampling accepted " << out.size() << " of " << n << " positions in " << max_attempts
          << " attempts";
      throw SamplingError(msg.str());
    }
    const Point x{box_lo[0] + uniform01(rng) * box_span[0], box_lo[1] + uniform01(rng) * box_span[1]};
    const double u = uniform01(rng) * rho_max;
    double value = 0;
    if (!interpolate_multilinear(g, rho, {}, x, value)) continue;
    if (u < value) out.push_back(x);
  }
  return out;
}

EnsembleIntegrator::EnsembleIntegrator(std::vector<Point> initial, std::size_t dim, std::vector<double> times,
                                       TrajectoryKind kind, std::size_t substeps)
    : dim_(dim),
      substeps_(substeps),
      ensemble_(dim, kind, std::move(times), initial.size()),
      current_(std::move(initial)),
      alive_(current_.size(), 1) {
  if (substeps_ == 0) throw InvalidArgument("substeps must be positive");
  const auto& t = ensemble_.times();
  if (t.empty()) throw InvalidArgument("integrator needs at least one output time");
  for (std::size_t i = 2; i < t.size(); ++i) {
    const double d0 = t[1] - t[0];
    if (std::abs((t[i] - t[i - 1]) - d0) > 1e-9 * d0) throw InvalidArgument("output times must be uniform");
  }
}

bool EnsembleIntegrator::velocity_at(const VelocityFieldSample& a, const VelocityFieldSample& b, double s,
                                     const Point& x, Point& v) const {
  Point va, vb;
  if (!interpolate_velocity(a, x, va) || !interpolate_velocity(b, x, vb)) return false;
  for (std::size_t d = 0; d < dim_; ++d) v[d] = (1.0 - s) * va[d] + s * vb[d];
  return true;
}

void EnsembleIntegrator::push(const VelocityFieldSample& sample) {
  if (complete()) throw InvalidArgument("all output times have been integrated");
  const double expected = ensemble_.times()[next_];
  if (std::abs(sample.time - expected) > 1e-9 * std::max(1.0, std::abs(expected))) {
    throw InvalidArgument("velocity sample time does not match the next output time");
  }
  if (sample.grid.dim() != dim_) throw InvalidArgument("velocity sample dimension does not match");
  const std::size_t k = next_;
  const std::size_t np = current_.size();

  if (k > 0) {
    const VelocityFieldSample& a = *previous_;
    const double interval = sample.time - a.time;
    const double h = interval / static_cast<double>(substeps_);
    const double ds = 1.0 / static_cast<double>(substeps_);
    for (std::size_t p = 0; p < np; ++p) {
      if (!alive_[p]) continue;
      Point x = current_[p];
      bool ok = true;
      for (std::size_t j = 0; j < substeps_ && ok; ++j) {
        const double s0 = static_cast<double>(j) * ds;
        Point k1{}, k2{}, k3{}, k4{}, y{};
        ok = velocity_at(a, sample, s0, x, k1);
        if (ok) {
          for (std::size_t d = 0; d < dim_; ++d) y[d] = x[d] + 0.5 * h * k1[d];
          ok = velocity_at(a, sample, s0 + 0.5 * ds, y, k2);
        }
        if (ok) {
          for (std::size_t d = 0; d < dim_; ++d) y[d] = x[d] + 0.5 * h * k2[d];
          ok = velocity_at(a, sample, s0 + 0.5 * ds, y, k3);
        }
        if (ok) {
          for (std::size_t d = 0; d < dim_; ++d) y[d] = x[d] + h * k3[d];
          ok = velocity_at(a, sample, s0 + ds, y, k4);
        }
        if (ok) {
          for (std::size_t d = 0; d < dim_; ++d) x[d] += h / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d]);
        }
      }
      if (ok) {
        current_[p] = x;
      } else {
        alive_[p] = 0;
        ensemble_.absorb(p, k);
      }
    }
  }
  for (std::size_t p = 0; p < np; ++p) {
    if (!alive_[p]) continue;
    Point v{};
    if (interpolate_velocity(sample, current_[p], v)) {
      ensemble_.set(k, p, current_[p], v);
    } else {
      ensemble_.set(k, p, current_[p], Point{0.0, 0.0});
      alive_[p] = 0;
      ensemble_.absorb(p, k + 1 < ensemble_.time_count() ? k + 1 : k);
    }
  }
  previous_ = sample;
  ++next_;
}

TrajectoryEnsemble EnsembleIntegrator::take() {
  if (!complete()) throw InvalidArgument("ensemble integration is incomplete");
  return std::move(ensemble_);
}

TrajectoryEnsemble integrate_ensemble(const std::vector<Point>& initial, const std::vector<VelocityFieldSample>& samples,
                                      TrajectoryKind kind, std::size_t substeps) {
  if (samples.empty()) throw InvalidArgument("no velocity samples");
  std::vector<double> times;
  for (const auto& s : samples) times.push_back(s.time);
  EnsembleIntegrator integrator(initial, samples.front().grid.dim(), std::move(times), kind, substeps);
  for (const auto& s : samples) integrator.push(s);
  return integrator.take();
}

EnsembleDispersion dispersion(const TrajectoryEnsemble& ensemble, std::size_t time_index) {
  EnsembleDispersion out{};
  const std::size_t dim = ensemble.dim();
  for (std::size_t p = 0; p < ensemble.particle_count(); ++p) {
    const auto at = ensemble.absorbed_at(p);
    if (at && *at <= time_index) continue;
    ++out.live;
    const Point x = ensemble.position(time_index, p), v = ensemble.velocity(time_index, p);
    for (std::size_t a = 0; a < dim; ++a) {
      out.mean_position[a] += x[a];
      out.mean_velocity[a] += v[a];
    }
  }
  if (out.live == 0) return out;
  const double n = static_cast<double>(out.live);
  for (std::size_t a = 0; a < dim; ++a) {
    out.mean_position[a] /= n;
    out.mean_velocity[a] /= n;
  }
  for (std::size_t p = 0; p < ensemble.particle_count(); ++p) {
    const auto at = ensemble.absorbed_at(p);
    if (at && *at <= time_index) continue;
    const Point x = ensemble.position(time_index, p), v = ensemble.velocity(time_index, p);
    for (std::size_t a = 0; a < dim; ++a) {
      out.position_variance[a] += (x[a] - out.mean_position[a]) * (x[a] - out.mean_position[a]) / n;
      out.velocity_variance[a] += (v[a] - out.mean_velocity[a]) * (v[a] - out.mean_velocity[a]) / n;
    }
  }
  return out;
}

}  // namespace semiclassical
