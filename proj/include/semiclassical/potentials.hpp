#pragma once

// Catalog of potentials V(x) used by the scenarios. Free, linear and
// harmonic entries carry the closed-form extremal action S_cl(x, t; x0)
// needed by the min-plus solver; the double slit has none.

#include <span>
#include <string>

#include "semiclassical/grid.hpp"
#include "semiclassical/trajectories.hpp"

namespace semiclassical {

enum class PotentialKind { free, linear, harmonic, double_slit };

const char* to_string(PotentialKind kind) noexcept;

/// Two slits in a thin wall perpendicular to axis 0. The wall is a smooth
/// top-hat of the given height; tanh edges of width edge_width.
struct DoubleSlitGeometry {
  double barrier_position = 0.0;   // wall center along axis 0
  double barrier_thickness = 0.6;
  double slit_separation = 4.0;    // center-to-center distance along axis 1
  double slit_width = 1.0;
  double height = 200.0;
  double edge_width = 0.08;
};

class PotentialSpec {
 public:
  static PotentialSpec free(double mass, double offset = 0.0);
  /// V(x) = -force . x + offset
  static PotentialSpec linear(double mass, const Point& force, double offset = 0.0);
  /// V(x) = m omega^2 |x|^2 / 2 + offset
  static PotentialSpec harmonic(double mass, double omega, double offset = 0.0);
  static PotentialSpec double_slit(double mass, const DoubleSlitGeometry& geometry);

  PotentialKind kind() const noexcept { return kind_; }
  double mass() const noexcept { return mass_; }
  double omega() const noexcept { return omega_; }
  const Point& force() const noexcept { return force_; }
  double offset() const noexcept { return offset_; }
  const DoubleSlitGeometry& geometry() const noexcept { return geometry_; }

  double value(const Point& x, double t = 0.0) const;
  /// grad V at x.
  Point gradient(const Point& x, double t = 0.0) const;
  RealField sample(const Grid& grid, double t = 0.0) const;

  /// True when V does not depend on position (only an offset).
  bool spatially_uniform() const noexcept { return kind_ == PotentialKind::free; }
  bool has_classical_action() const noexcept { return kind_ != PotentialKind::double_slit; }
  /// Closed-form classical motion exists (everything but the double slit).
  bool has_closed_form_motion() const noexcept { return kind_ != PotentialKind::double_slit; }

  /// Smooth 0..1 indicator of the wall (double slit only; 0 elsewhere).
  double wall_indicator(const Point& x) const;

  std::string describe() const;

 private:
  PotentialSpec(PotentialKind kind, double mass);

  PotentialKind kind_;
  double mass_;
  double omega_ = 0.0;
  Point force_{0.0, 0.0};
  double offset_ = 0.0;
  DoubleSlitGeometry geometry_{};
};

/// Exact extremal action from x0 (time 0) to x (time t). Throws
/// CausticError when sin(omega t) vanishes for the oscillator and
/// UnsupportedPotential for the double slit.
double classical_action(const PotentialSpec& spec, const Point& x, double t, const Point& x0);

/// Gradient of S_cl with respect to x (the arrival momentum).
Point classical_action_gradient(const PotentialSpec& spec, const Point& x, double t, const Point& x0);

struct PhasePoint {
  Point x;
  Point v;
};

/// Position and velocity at time t of the particle launched from (x0, v0).
PhasePoint classical_state(const PotentialSpec& spec, std::size_t dim, const Point& x0, const Point& v0,
                           double t);

/// The same, advancing an existing state by dt with step-controlled RK4.
/// Used for potentials without closed-form motion.
PhasePoint integrate_classical(const PotentialSpec& spec, std::size_t dim, const PhasePoint& start, double t0,
                               double dt, double tolerance = 1e-10);

/// Path solving m x'' = -grad V with x(0) = x0, x'(0) = v0, sampled at
/// times (strictly increasing, starting at 0).
TrajectoryEnsemble classical_trajectory(const PotentialSpec& spec, std::size_t dim, const Point& x0,
                                        const Point& v0, std::span<const double> times);

}  // namespace semiclassical
