#pragma once

// hbar sweeps. A statistical sweep evolves the same hbar-free initial data
// (rho0, S0) at every rung, integrates Bohm particles from one shared set
// of starting points and compares with the classical limit (min-plus
// action, transported density, classical paths from the same points). A
// determinist sweep evolves coherent states and compares with the closed
// form and with the single classical path.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "semiclassical/bohm.hpp"
#include "semiclassical/classical_limit.hpp"
#include "semiclassical/madelung.hpp"
#include "semiclassical/scenario.hpp"
#include "semiclassical/statistics.hpp"
#include "semiclassical/trajectories.hpp"

namespace semiclassical {

/// Smooth test functions for the weak-convergence check.
struct TestFunction {
  std::string name;
  std::function<double(const Point&, std::size_t dim)> f;
};
const std::vector<TestFunction>& weak_battery();

struct DoubleSlitMetrics {
  std::size_t transmitted = 0;  // particles past the wall at the final time
  std::size_t channels = 0;     // gap-statistic cluster count of their final transverse positions
  std::size_t axis_crossings = 0;
  double mean_curvature = 0.0;  // behind the wall
  double exit_deviation = 0.0;  // mean sup distance from the straight line out of the slit
};

struct DeterministMetrics {
  double density_linf = 0.0;  // vs the closed form, max over outputs
  double density_linf_final = 0.0;
  double action_distance = 0.0;  // sup-norm modulo a constant on the above-floor region
  double action_distance_final = 0.0;
  std::vector<double> q_times;
  std::vector<double> q_at_xi;
  double q_expected = 0.0;  // d hbar w / 2
  double q_at_xi_rel_error = 0.0;
  double q_field_rel_error = 0.0;  // scale max(|Q|, hbar w)
  std::vector<double> weak_errors;  // per battery entry, max over outputs
  double action_gap_max = 0.0;      // sup |S - S_limit| on the window, over outputs
  double action_gap_deviation = 0.0;  // sup |S - S_limit + d hbar w t / 2|
  std::vector<double> equivariance_times;
  std::vector<double> equivariance_l1;
};

struct RungReport {
  double divisor = 1.0;
  double hbar = 1.0;
  std::vector<std::size_t> points;
  double dt = 0.0;
  std::size_t steps_per_output = 0;
  std::size_t outputs = 0;
  double kinetic_phase = 0.0;
  double v_max = 0.0;
  double wavelength = 0.0;

  double norm_drift = 0.0;    // max |norm^2 + absorbed - 1|
  double energy_drift = 0.0;  // max relative change, only without absorber
  double absorbed_probability = 0.0;
  std::size_t max_components = 0;
  std::size_t max_vortices = 0;
  double madelung_hj_residual = 0.0;  // on rho >= 1e-6 max rho, last two outputs
  double madelung_continuity_residual = 0.0;

  std::size_t bohm_particles = 0;
  std::size_t bohm_absorbed = 0;
  std::optional<EnsembleDispersion> final_dispersion;

  std::vector<double> trajectory_deviation;  // per compared particle
  std::optional<double> median_deviation;
  std::optional<double> max_deviation;
  std::optional<double> density_l1;            // vs the transported density
  std::optional<double> action_distance;       // vs the min-plus action
  std::optional<double> equivariance_l1;

  std::optional<DoubleSlitMetrics> double_slit;
  std::optional<DeterministMetrics> determinist;
};

struct ClassicalReport {
  std::string density_method;
  std::optional<double> hj_residual;  // min-plus action, L-infinity on the window
  std::size_t multivalued_nodes = 0;
  std::size_t boundary_nodes = 0;
};

struct ConvergenceReport {
  std::string scenario;
  ScenarioKind kind = ScenarioKind::statistical;
  std::size_t dim = 1;
  std::uint64_t seed = 0;
  double t_final = 0.0;
  std::string potential;
  std::vector<RungReport> rungs;
  std::optional<ClassicalReport> classical;
  std::vector<std::pair<std::string, SlopeFit>> slopes;  // metric vs hbar
  std::optional<double> deviation_decreasing_fraction;
  std::optional<double> median_deviation_ratio;  // smallest hbar / largest hbar
  std::optional<bool> density_l1_decreasing;
};

struct RungOutput {
  TrajectoryEnsemble bohm;  // first trajectory_export particles
  std::optional<MadelungFields> final_fields;
};

struct SweepResult {
  ConvergenceReport report;
  std::vector<RungOutput> rungs;
  std::optional<TrajectoryEnsemble> classical;  // first trajectory_export particles
  std::optional<MinPlusSolution> classical_action;
  std::optional<RealField> classical_density;
};

struct SweepOptions {
  /// Maximum number of rungs evolved at the same time.
  std::size_t jobs = 1;
  std::function<void(const std::string&)> log;
};

SweepResult run_statistical_sweep(const Scenario& scenario, const SweepOptions& options = {});
SweepResult run_determinist_sweep(const Scenario& scenario, const SweepOptions& options = {});
/// Dispatches on scenario.kind.
SweepResult run_sweep(const Scenario& scenario, const SweepOptions& options = {});

/// Double-slit trajectory statistics on a Bohm ensemble.
DoubleSlitMetrics double_slit_metrics(const TrajectoryEnsemble& ensemble, const DoubleSlitGeometry& geometry,
                                      std::uint64_t seed);

/// Initial rho0 and psi0 of a statistical scenario on a grid.
RealField initial_density(const Scenario& scenario, const Grid& grid);
WaveField initial_wave(const Scenario& scenario, const Grid& grid, double hbar);

}  // namespace semiclassical
