#pragma once

// de Broglie-Bohm velocity fields v = grad S / m (optionally with the spin
// term (hbar / 2m) grad ln rho x k in the plane) and particle ensembles
// integrated through a stream of sampled fields.

#include <cstdint>
#include <optional>
#include <vector>

#include "semiclassical/grid.hpp"
#include "semiclassical/madelung.hpp"
#include "semiclassical/trajectories.hpp"

namespace semiclassical {

struct VelocityFieldSample {
  Grid grid;
  double time;
  std::vector<std::vector<double>> components;  // per axis; 0 where invalid
  std::vector<std::uint8_t> valid;
};

/// Nodes where the mask is below one (the absorbing layer) are marked
/// invalid along with below-floor nodes.
VelocityFieldSample velocity_field(const MadelungFields& fields, const std::optional<SpinAxis>& spin = std::nullopt,
                                   const RealField* absorbing_mask = nullptr);

/// Velocity at x by multilinear interpolation; false when x is outside the
/// box or touches an invalid node.
bool interpolate_velocity(const VelocityFieldSample& field, const Point& x, Point& v);

/// N positions distributed as rho0: inverse CDF of the piecewise-linear
/// density in 1D, rejection against the bilinear density inside the
/// bounding box of the above-floor nodes in 2D. Deterministic in seed.
/// Throws SamplingError when rejection needs too many attempts.
std::vector<Point> sample_initial_positions(const RealField& rho0, std::size_t n, std::uint64_t seed,
                                            double rho_floor_relative = 1e-12);

/// Advances particles through consecutive field samples with RK4. Between
/// samples the velocity is linear in time; `substeps` RK4 steps are taken
/// per interval. Particles whose stencil leaves the valid region are
/// absorbed.
class EnsembleIntegrator {
 public:
  EnsembleIntegrator(std::vector<Point> initial, std::size_t dim, std::vector<double> times,
                     TrajectoryKind kind = TrajectoryKind::bohm, std::size_t substeps = 4);

  /// Feeds the sample for the next output time. The first sample must be at
  /// times.front().
  void push(const VelocityFieldSample& sample);

  std::size_t pushed() const noexcept { return next_; }
  bool complete() const noexcept { return next_ == ensemble_.time_count(); }
  const TrajectoryEnsemble& ensemble() const noexcept { return ensemble_; }
  TrajectoryEnsemble take();

 private:
  bool velocity_at(const VelocityFieldSample& a, const VelocityFieldSample& b, double s, const Point& x,
                   Point& v) const;

  std::size_t dim_;
  std::size_t substeps_;
  TrajectoryEnsemble ensemble_;
  std::vector<Point> current_;
  std::vector<std::uint8_t> alive_;
  std::optional<VelocityFieldSample> previous_;
  std::size_t next_ = 0;
};

/// Integrates an ensemble through a full list of samples (same rules).
TrajectoryEnsemble integrate_ensemble(const std::vector<Point>& initial, const std::vector<VelocityFieldSample>& samples,
                                      TrajectoryKind kind = TrajectoryKind::bohm, std::size_t substeps = 4);

/// Per-axis mean and variance of positions and velocities of the live
/// particles at one output time.
struct EnsembleDispersion {
  Point mean_position;
  Point position_variance;
  Point mean_velocity;
  Point velocity_variance;
  std::size_t live;
};
EnsembleDispersion dispersion(const TrajectoryEnsemble& ensemble, std::size_t time_index);

}  // namespace semiclassical
