#pragma once

// Symmetric (Strang) split-step Fourier propagation of
//   i hbar dpsi/dt = -(hbar^2 / 2m) lap psi + V psi
// on a periodic grid.

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "semiclassical/grid.hpp"
#include "semiclassical/potentials.hpp"

namespace semiclassical {

struct PropagatorConfig {
  double dt = 0.0;
  std::size_t steps_per_output = 1;
  /// Values in [0, 1], multiplied into psi after every step.
  std::optional<RealField> boundary_mask;
};

/// Precomputed phase factors for one (grid, hbar, mass, V, dt). Throws
/// AliasingError when V varies in space and the kinetic phase on the
/// highest wavenumber reaches pi per step.
class Propagator {
 public:
  Propagator(const Grid& grid, double hbar, double mass, const PotentialSpec& potential, PropagatorConfig cfg);

  const PropagatorConfig& config() const noexcept { return cfg_; }
  const Grid& grid() const noexcept { return grid_; }
  double hbar() const noexcept { return hbar_; }
  double mass() const noexcept { return mass_; }

  /// One Strang step in place.
  void step(WaveField& psi) const;

  /// n steps in place. Adjacent half-potential factors are fused, so the
  /// result matches n calls to step() up to rounding. Returns the
  /// probability removed by the mask.
  double advance(WaveField& psi, std::size_t n) const;

 private:
  void check(const WaveField& psi) const;

  Grid grid_;
  double hbar_;
  double mass_;
  PropagatorConfig cfg_;
  std::vector<Complex> kinetic_;
  std::vector<Complex> half_potential_;
  std::vector<Complex> full_potential_;
};

/// Kinetic phase hbar * max|k|^2 * dt / (2m) for the grid.
double kinetic_phase_per_step(const Grid& grid, double hbar, double mass, double dt);

/// Convenience: a single step with a fresh propagator.
WaveField step(const WaveField& psi, const PotentialSpec& potential, const PropagatorConfig& cfg);

struct Observation {
  double time;
  double norm;
  double energy;
  Point center;
  double absorbed;  // cumulative probability removed by the mask
};

/// <psi|H|psi> with the kinetic part from the spectrum (Parseval).
double energy(const WaveField& psi, const PotentialSpec& potential);
Point center_of_mass(const WaveField& psi);

struct Evolution {
  std::vector<WaveField> snapshots;  // including t = 0
  std::vector<Observation> observations;
};

/// Called with every snapshot, starting with the initial one. Returning
/// false stops the run early.
using SnapshotCallback = std::function<bool(const WaveField&, const Observation&)>;

/// Advances psi0 to t_final, emitting a snapshot every steps_per_output
/// steps. t_final must be a multiple of dt * steps_per_output.
void evolve_streaming(const WaveField& psi0, const PotentialSpec& potential, const PropagatorConfig& cfg,
                      double t_final, const SnapshotCallback& callback);

Evolution evolve(const WaveField& psi0, const PotentialSpec& potential, const PropagatorConfig& cfg,
                 double t_final);

/// Number of output intervals for t_final; throws InvalidArgument when
/// t_final is not a multiple of dt * steps_per_output.
std::size_t output_count(const PropagatorConfig& cfg, double t_final);

struct ResolutionCheck {
  bool ok;
  double wavelength;                       // 2 pi hbar / (m v_max)
  std::vector<std::size_t> required_points;  // per axis, even
};

/// Requires at least points_per_wavelength nodes per de Broglie wavelength.
ResolutionCheck check_resolution(const Grid& grid, double hbar, double mass, double v_max,
                                 double points_per_wavelength = 8.0);

/// Smallest power of two >= n (and >= 8).
std::size_t fft_size_at_least(std::size_t n);

/// Multiplicative absorber: 1 in the interior, falling to 0 over `width`
/// at the box edges with a cos^(1/8) profile.
RealField absorbing_mask(const Grid& grid, double width);

}  // namespace semiclassical
