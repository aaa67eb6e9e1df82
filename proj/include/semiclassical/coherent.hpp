#pragma once

// Closed-form coherent state of the isotropic oscillator V = m w^2 |x|^2 / 2
// in one or two dimensions:
//   rho(x, t) = (2 pi s^2)^(-d/2) exp(-|x - xi(t)|^2 / (2 s^2)),  s^2 = hbar / (2 m w)
//   S(x, t)   = m xi'(t) . x + g(t) - d hbar w t / 2
//   g(t)      = int_0^t (-m |xi'|^2 / 2 + m w^2 |xi|^2 / 2) ds
// with xi(t) = x0 cos(w t) + (v0 / w) sin(w t). No grids are involved except
// for the explicit sampling helpers.

#include <cstddef>
#include <optional>

#include "semiclassical/grid.hpp"
#include "semiclassical/trajectories.hpp"

namespace semiclassical {

struct LimitFields {
  Point concentration;  // xi(t): the density tends to a point mass here
  Point momentum;       // m xi'(t)
  double g;

  double action(const Point& x) const { return momentum[0] * x[0] + momentum[1] * x[1] + g; }
};

/// Both sides of the oscillator relation along the path: 2 V(xi) and
/// m xi'' . xi. They agree in magnitude and differ in sign.
struct OscillatorIdentity {
  double two_potential;
  double mass_accel_dot_xi;
};

class CoherentState {
 public:
  CoherentState(std::size_t dim, double omega, double mass, double hbar, const Point& x0, const Point& v0);

  std::size_t dim() const noexcept { return dim_; }
  double omega() const noexcept { return omega_; }
  double mass() const noexcept { return mass_; }
  double hbar() const noexcept { return hbar_; }
  const Point& x0() const noexcept { return x0_; }
  const Point& v0() const noexcept { return v0_; }

  /// sqrt(hbar / (2 m w)).
  double sigma_hbar() const;

  Point xi(double t) const;
  Point xi_dot(double t) const;
  Point xi_ddot(double t) const;

  double density(const Point& x, double t) const;
  double action(const Point& x, double t) const;
  /// Closed antiderivative.
  double g(double t) const;
  /// Adaptive Gauss-Kronrod quadrature of the defining integral.
  double g_quadrature(double t) const;
  double quantum_potential(const Point& x, double t) const;
  /// grad S / m, plus (hbar / 2m) grad ln rho x k when a spin axis is given.
  Point velocity(const Point& x, double t, const std::optional<SpinAxis>& spin = std::nullopt) const;

  WaveField wavefunction(const Grid& grid, double t) const;
  RealField density_field(const Grid& grid, double t) const;
  RealField action_field(const Grid& grid, double t) const;

  LimitFields limit_fields(double t) const;
  OscillatorIdentity identity(double t) const;

 private:
  std::size_t dim_;
  double omega_;
  double mass_;
  double hbar_;
  Point x0_;
  Point v0_;
};

}  // namespace semiclassical
