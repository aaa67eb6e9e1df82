#include "semiclassical/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "semiclassical/errors.hpp"

namespace semiclassical {
namespace {

double dot(const Point& a, const Point& b) { return a[0] * b[0] + a[1] * b[1]; }

// 1/2 [tanh((s - lo)/eps) - tanh((s - hi)/eps)] and its derivative.
double top_hat(double s, double lo, double hi, double eps) {
  return 0.5 * (std::tanh((s - lo) / eps) - std::tanh((s - hi) / eps));
}

double top_hat_derivative(double s, double lo, double hi, double eps) {
  const double a = 1.0 / std::cosh((s - lo) / eps);
  const double b = 1.0 / std::cosh((s - hi) / eps);
  return 0.5 / eps * (a * a - b * b);
}

// Sine of omega t, rejecting caustics.
double checked_sin(double omega, double t) {
  const double s = std::sin(omega * t);
  if (std::abs(s) < 1e-12) {
    std::ostringstream msg;
    msg << "harmonic action has a caustic at omega*t = " << omega * t << " (sin = 0)";
    throw CausticError(msg.str());
  }
  return s;
}

}  // namespace

const char* to_string(PotentialKind kind) noexcept {
  switch (kind) {
    case PotentialKind::free: return "free";
    case PotentialKind::linear: return "linear";
    case PotentialKind::harmonic: return "harmonic";
    case PotentialKind::double_slit: return "double_slit";
  }
  return "unknown";
}

PotentialSpec::PotentialSpec(PotentialKind kind, double mass) : kind_(kind), mass_(mass) {
  if (!(mass > 0) || !std::isfinite(mass)) throw InvalidArgument("mass must be positive");
}

PotentialSpec PotentialSpec::free(double mass, double offset) {
  PotentialSpec p(PotentialKind::free, mass);
  p.offset_ = offset;
  return p;
}

PotentialSpec PotentialSpec::linear(double mass, const Point& force, double offset) {
  PotentialSpec p(PotentialKind::linear, mass);
  p.force_ = force;
  p.offset_ = offset;
  return p;
}

PotentialSpec PotentialSpec::harmonic(double mass, double omega, double offset) {
  if (!(omega > 0) || !std::isfinite(omega)) throw InvalidArgument("harmonic potential requires omega > 0");
  PotentialSpec p(PotentialKind::harmonic, mass);
  p.omega_ = omega;
  p.offset_ = offset;
  return p;
}

PotentialSpec PotentialSpec::double_slit(double mass, const DoubleSlitGeometry& g) {
  if (!(g.barrier_thickness > 0) || !(g.slit_width > 0) || !(g.edge_width > 0) || !(g.height > 0)) {
    throw InvalidArgument("double slit geometry needs positive thickness, slit width, edge width and height");
  }
  if (!(g.slit_separation > g.slit_width)) {
    throw InvalidArgument("slit separation must exceed the slit width");
  }
  PotentialSpec p(PotentialKind::double_slit, mass);
  p.geometry_ = g;
  return p;
}

double PotentialSpec::wall_indicator(const Point& x) const {
  if (kind_ != PotentialKind::double_slit) return 0.0;
  const auto& g = geometry_;
  const double half_t = 0.5 * g.barrier_thickness;
  const double wall = top_hat(x[0], g.barrier_position - half_t, g.barrier_position + half_t, g.edge_width);
  const double c = 0.5 * g.slit_separation;
  const double a = 0.5 * g.slit_width;
  const double open = top_hat(x[1], c - a, c + a, g.edge_width) + top_hat(x[1], -c - a, -c + a, g.edge_width);
  return wall * (1.0 - open);
}

double PotentialSpec::value(const Point& x, double /*t*/) const {
  switch (kind_) {
    case PotentialKind::free: return offset_;
    case PotentialKind::linear: return -dot(force_, x) + offset_;
    case PotentialKind::harmonic: return 0.5 * mass_ * omega_ * omega_ * dot(x, x) + offset_;
    case PotentialKind::double_slit: return geometry_.height * wall_indicator(x);
  }
  return 0.0;
}

Point PotentialSpec::gradient(const Point& x, double /*t*/) const {
  switch (kind_) {
    case PotentialKind::free: return {0.0, 0.0};
    case PotentialKind::linear: return {-force_[0], -force_[1]};
    case PotentialKind::harmonic: {
      const double k = mass_ * omega_ * omega_;
      return {k * x[0], k * x[1]};
    }
    case PotentialKind::double_slit: {
      const auto& g = geometry_;
      const double half_t = 0.5 * g.barrier_thickness;
      const double lo = g.barrier_position - half_t, hi = g.barrier_position + half_t;
      const double wall = top_hat(x[0], lo, hi, g.edge_width);
      const double dwall = top_hat_derivative(x[0], lo, hi, g.edge_width);
      const double c = 0.5 * g.slit_separation;
      const double a = 0.5 * g.slit_width;
      const double open = top_hat(x[1], c - a, c + a, g.edge_width) + top_hat(x[1], -c - a, -c + a, g.edge_width);
      const double dopen = top_hat_derivative(x[1], c - a, c + a, g.edge_width) +
                           top_hat_derivative(x[1], -c - a, -c + a, g.edge_width);
      return {g.height * dwall * (1.0 - open), -g.height * wall * dopen};
    }
  }
  return {0.0, 0.0};
}

RealField PotentialSpec::sample(const Grid& grid, double t) const {
  if (kind_ == PotentialKind::double_slit && grid.dim() != 2) {
    throw InvalidArgument("the double slit potential needs a two-dimensional grid");
  }
  RealField out(grid, FieldUnits::energy);
  for (std::size_t f = 0; f < grid.size(); ++f) out.values[f] = value(grid.node(f), t);
  return out;
}

std::string PotentialSpec::describe() const {
  std::ostringstream os;
  os << to_string(kind_) << "(mass=" << mass_;
  switch (kind_) {
    case PotentialKind::linear: os << ", force=(" << force_[0] << "," << force_[1] << ")"; break;
    case PotentialKind::harmonic: os << ", omega=" << omega_; break;
    case PotentialKind::double_slit:
      os << ", wall_x=" << geometry_.barrier_position << ", separation=" << geometry_.slit_separation
         << ", slit_width=" << geometry_.slit_width << ", height=" << geometry_.height;
      break;
    default: break;
  }
  if (offset_ != 0.0) os << ", offset=" << offset_;
  os << ")";
  return os.str();
}

double classical_action(const PotentialSpec& spec, const Point& x, double t, const Point& x0) {
  if (!(t > 0)) throw InvalidArgument("classical action needs t > 0");
  const double m = spec.mass();
  const Point d{x[0] - x0[0], x[1] - x0[1]};
  const double gauge = -spec.offset() * t;
  switch (spec.kind()) {
    case PotentialKind::free: return m * dot(d, d) / (2.0 * t) + gauge;
    case PotentialKind::linear: {
      const Point& f = spec.force();
      const Point sum{x[0] + x0[0], x[1] + x0[1]};
      return m * dot(d, d) / (2.0 * t) + 0.5 * dot(f, sum) * t - dot(f, f) * t * t * t / (24.0 * m) + gauge;
    }
    case PotentialKind::harmonic: {
      const double w = spec.omega();
      const double s = checked_sin(w, t);
      const double c = std::cos(w * t);
      return m * w / (2.0 * s) * ((dot(x, x) + dot(x0, x0)) * c - 2.0 * dot(x, x0)) + gauge;
    }
    case PotentialKind::double_slit:
      throw UnsupportedPotential("the double slit potential has no closed-form classical action");
  }
  return 0.0;
}

Point classical_action_gradient(const PotentialSpec& spec, const Point& x, double t, const Point& x0) {
  if (!(t > 0)) throw InvalidArgument("classical action needs t > 0");
  const double m = spec.mass();
  switch (spec.kind()) {
    case PotentialKind::free: return {m * (x[0] - x0[0]) / t, m * (x[1] - x0[1]) / t};
    case PotentialKind::linear: {
      const Point& f = spec.force();
      return {m * (x[0] - x0[0]) / t + 0.5 * f[0] * t, m * (x[1] - x0[1]) / t + 0.5 * f[1] * t};
    }
    case PotentialKind::harmonic: {
      const double w = spec.omega();
      const double s = checked_sin(w, t);
      const double c = std::cos(w * t);
      return {m * w / s * (x[0] * c - x0[0]), m * w / s * (x[1] * c - x0[1])};
    }
    case PotentialKind::double_slit:
      throw UnsupportedPotential("the double slit potential has no closed-form classical action");
  }
  return {0.0, 0.0};
}

namespace {

PhasePoint rk4_step(const PotentialSpec& spec, std::size_t dim, const PhasePoint& s, double t, double h) {
  const double inv_m = 1.0 / spec.mass();
  auto accel = [&](const Point& x, double tt) {
    const Point g = spec.gradient(x, tt);
    Point a{0.0, 0.0};
    for (std::size_t i = 0; i < dim; ++i) a[i] = -g[i] * inv_m;
    return a;
  };
  auto shift = [&](const Point& base, const Point& d, double f) {
    Point r = base;
    for (std::size_t i = 0; i < dim; ++i) r[i] += f * d[i];
    return r;
  };
  const Point k1x = s.v;
  const Point k1v = accel(s.x, t);
  const Point k2x = shift(s.v, k1v, 0.5 * h);
  const Point k2v = accel(shift(s.x, k1x, 0.5 * h), t + 0.5 * h);
  const Point k3x = shift(s.v, k2v, 0.5 * h);
  const Point k3v = accel(shift(s.x, k2x, 0.5 * h), t + 0.5 * h);
  const Point k4x = shift(s.v, k3v, h);
  const Point k4v = accel(shift(s.x, k3x, h), t + h);
  PhasePoint out = s;
  for (std::size_t i = 0; i < dim; ++i) {
    out.x[i] += h / 6.0 * (k1x[i] + 2 * k2x[i] + 2 * k3x[i] + k4x[i]);
    out.v[i] += h / 6.0 * (k1v[i] + 2 * k2v[i] + 2 * k3v[i] + k4v[i]);
  }
  return out;
}

}  // namespace

PhasePoint integrate_classical(const PotentialSpec& spec, std::size_t dim, const PhasePoint& start, double t0,
                               double dt, double tolerance) {
  PhasePoint s = start;
  double t = t0;
  const double t_end = t0 + dt;
  double h = std::min(dt, 1e-2);
  while (t < t_end) {
    h = std::min(h, t_end - t);
    const PhasePoint full = rk4_step(spec, dim, s, t, h);
    const PhasePoint half = rk4_step(spec, dim, rk4_step(spec, dim, s, t, 0.5 * h), t + 0.5 * h, 0.5 * h);
    double err = 0.0, scale = 1.0;
    for (std::size_t i = 0; i < dim; ++i) {
      err = std::max({err, std::abs(full.x[i] - half.x[i]), std::abs(full.v[i] - half.v[i])});
      scale = std::max({scale, std::abs(half.x[i]), std::abs(half.v[i])});
    }
    err /= 15.0;
    if (err <= tolerance * scale || h < 1e-12) {
      t += h;
      s = half;
      for (std::size_t i = 0; i < dim; ++i) {  // Richardson extrapolation
        s.x[i] += (half.x[i] - full.x[i]) / 15.0;
        s.v[i] += (half.v[i] - full.v[i]) / 15.0;
      }
      const double grow = err > 0 ? 0.9 * std::pow(tolerance * scale / err, 0.2) : 2.0;
      h *= std::clamp(grow, 0.2, 2.0);
    } else {
      h *= std::clamp(0.9 * std::pow(tolerance * scale / err, 0.2), 0.1, 0.5);
    }
  }
  return s;
}

PhasePoint classical_state(const PotentialSpec& spec, std::size_t dim, const Point& x0, const Point& v0, double t) {
  PhasePoint out{{0.0, 0.0}, {0.0, 0.0}};
  const double m = spec.mass();
  switch (spec.kind()) {
    case PotentialKind::free:
      for (std::size_t i = 0; i < dim; ++i) {
        out.x[i] = x0[i] + v0[i] * t;
        out.v[i] = v0[i];
      }
      return out;
    case PotentialKind::linear: {
      const Point& f = spec.force();
      for (std::size_t i = 0; i < dim; ++i) {
        out.x[i] = x0[i] + v0[i] * t + 0.5 * f[i] * t * t / m;
        out.v[i] = v0[i] + f[i] * t / m;
      }
      return out;
    }
    case PotentialKind::harmonic: {
      const double w = spec.omega();
      const double c = std::cos(w * t), s = std::sin(w * t);
      for (std::size_t i = 0; i < dim; ++i) {
        out.x[i] = x0[i] * c + v0[i] / w * s;
        out.v[i] = -x0[i] * w * s + v0[i] * c;
      }
      return out;
    }
    case PotentialKind::double_slit:
      return integrate_classical(spec, dim, PhasePoint{x0, v0}, 0.0, t);
  }
  return out;
}

TrajectoryEnsemble classical_trajectory(const PotentialSpec& spec, std::size_t dim, const Point& x0,
                                        const Point& v0, std::span<const double> times) {
  if (times.empty() || times.front() != 0.0) throw InvalidArgument("trajectory times must start at 0");
  TrajectoryEnsemble out(dim, TrajectoryKind::classical, std::vector<double>(times.begin(), times.end()), 1);
  PhasePoint s{x0, v0};
  out.set(0, 0, s.x, s.v);
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (spec.has_closed_form_motion()) {
      s = classical_state(spec, dim, x0, v0, times[i]);
    } else {
      s = integrate_classical(spec, dim, s, times[i - 1], times[i] - times[i - 1]);
    }
    out.set(i, 0, s.x, s.v);
  }
  return out;
}

}  // namespace semiclassical
