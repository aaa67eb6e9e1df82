#include "semiclassical/coherent.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "semiclassical/errors.hpp"

namespace semiclassical {
namespace {

double dot(const Point& a, const Point& b) { return a[0] * b[0] + a[1] * b[1]; }

}  // namespace

CoherentState::CoherentState(std::size_t dim, double omega, double mass, double hbar, const Point& x0,
                             const Point& v0)
    : dim_(dim), omega_(omega), mass_(mass), hbar_(hbar), x0_(x0), v0_(v0) {
  if (dim < 1 || dim > kMaxDim) throw InvalidArgument("coherent state dimension must be 1 or 2");
  if (!(omega > 0) || !(mass > 0) || !(hbar > 0)) {
    throw InvalidArgument("coherent state needs positive omega, mass and hbar");
  }
  if (dim == 1) {
    x0_[1] = 0.0;
    v0_[1] = 0.0;
  }
}

double CoherentState::sigma_hbar() const { return std::sqrt(hbar_ / (2.0 * mass_ * omega_)); }

Point CoherentState::xi(double t) const {
  const double c = std::cos(omega_ * t), s = std::sin(omega_ * t);
  return {x0_[0] * c + v0_[0] / omega_ * s, x0_[1] * c + v0_[1] / omega_ * s};
}

Point CoherentState::xi_dot(double t) const {
  const double c = std::cos(omega_ * t), s = std::sin(omega_ * t);
  return {-x0_[0] * omega_ * s + v0_[0] * c, -x0_[1] * omega_ * s + v0_[1] * c};
}

Point CoherentState::xi_ddot(double t) const {
  const Point p = xi(t);
  const double w2 = omega_ * omega_;
  return {-w2 * p[0], -w2 * p[1]};
}

double CoherentState::density(const Point& x, double t) const {
  const Point c = xi(t);
  const double s2 = hbar_ / (2.0 * mass_ * omega_);
  const Point d{x[0] - c[0], x[1] - c[1]};
  const double norm = std::pow(2.0 * std::numbers::pi * s2, -0.5 * static_cast<double>(dim_));
  return norm * std::exp(-dot(d, d) / (2.0 * s2));
}

double CoherentState::g(double t) const {
  const Point& a = x0_;
  const Point b{v0_[0] / omega_, v0_[1] / omega_};
  const double w2t = 2.0 * omega_ * t;
  return 0.25 * mass_ * omega_ * ((dot(a, a) - dot(b, b)) * std::sin(w2t) + 2.0 * dot(a, b) * (1.0 - std::cos(w2t)));
}

double CoherentState::g_quadrature(double t) const {
  if (t == 0.0) return 0.0;
  auto lagrangian_gap = [this](double s) {
    const Point p = xi(s), v = xi_dot(s);
    return -0.5 * mass_ * dot(v, v) + 0.5 * mass_ * omega_ * omega_ * dot(p, p);
  };
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(lagrangian_gap, 0.0, t, 20, 1e-15);
}

double CoherentState::action(const Point& x, double t) const {
  const Point v = xi_dot(t);
  return mass_ * dot(v, x) + g(t) - 0.5 * static_cast<double>(dim_) * hbar_ * omega_ * t;
}

double CoherentState::quantum_potential(const Point& x, double t) const {
  const Point c = xi(t);
  const Point d{x[0] - c[0], x[1] - c[1]};
  return 0.5 * static_cast<double>(dim_) * hbar_ * omega_ - 0.5 * mass_ * omega_ * omega_ * dot(d, d);
}

Point CoherentState::velocity(const Point& x, double t, const std::optional<SpinAxis>& spin) const {
  Point v = xi_dot(t);
  if (spin) {
    const double k = spin_orientation(*spin, dim_);
    // (hbar / 2m) grad ln rho = -w (x - xi); crossed with k e_z.
    const Point c = xi(t);
    const double gx = -omega_ * (x[0] - c[0]), gy = -omega_ * (x[1] - c[1]);
    v[0] += k * gy;
    v[1] -= k * gx;
  }
  return v;
}

WaveField CoherentState::wavefunction(const Grid& grid, double t) const {
  if (grid.dim() != dim_) throw InvalidArgument("grid dimension does not match the coherent state");
  std::vector<Complex> v(grid.size());
  for (std::size_t f = 0; f < grid.size(); ++f) {
    const Point x = grid.node(f);
    v[f] = std::polar(std::sqrt(density(x, t)), action(x, t) / hbar_);
  }
  return WaveField(grid, std::move(v), hbar_, mass_, t);
}

RealField CoherentState::density_field(const Grid& grid, double t) const {
  RealField out(grid, FieldUnits::density);
  for (std::size_t f = 0; f < grid.size(); ++f) out.values[f] = density(grid.node(f), t);
  return out;
}

RealField CoherentState::action_field(const Grid& grid, double t) const {
  RealField out(grid, FieldUnits::action);
  for (std::size_t f = 0; f < grid.size(); ++f) out.values[f] = action(grid.node(f), t);
  return out;
}

LimitFields CoherentState::limit_fields(double t) const {
  const Point v = xi_dot(t);
  return {xi(t), {mass_ * v[0], mass_ * v[1]}, g(t)};
}

OscillatorIdentity CoherentState::identity(double t) const {
  const Point p = xi(t), a = xi_ddot(t);
  return {mass_ * omega_ * omega_ * dot(p, p), mass_ * dot(a, p)};
}

}  // namespace semiclassical
