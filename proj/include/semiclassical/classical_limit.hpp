#pragma once

// Limits of the Madelung pair as hbar -> 0.
//  * Statistical case: the Hamilton-Jacobi action through the min-plus
//    (Hopf-Lax) formula S(x, t) = min_x0 [S0(x0) + S_cl(x, t; x0)], and the
//    density transported along the characteristics.
//  * Determinist case: one classical path xi(t) and the action linear in x
//    attached to it (oscillator only).

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "semiclassical/grid.hpp"
#include "semiclassical/potentials.hpp"
#include "semiclassical/trajectories.hpp"

namespace semiclassical {

using ScalarFunction = std::function<double(const Point&)>;
using VectorFunction = std::function<Point(const Point&)>;

/// Rectangular lattice of candidate starting points x0, endpoints included.
struct ScanGrid {
  std::size_t dim;
  Point lower;
  Point upper;
  std::array<std::size_t, kMaxDim> points{1, 1};

  static ScanGrid line(double lower, double upper, std::size_t points);
  static ScanGrid box(const Point& lower, const Point& upper, std::size_t points0, std::size_t points1);

  std::size_t size() const noexcept { return points[0] * (dim == 2 ? points[1] : 1); }
  double spacing(std::size_t axis) const;
  Point node(std::size_t flat) const;
};

struct HopfLaxOptions {
  /// Sub-grid refinement of the best scan node (Brent in 1D, a Newton /
  /// paraboloid iteration in 2D).
  bool refine = true;
  /// Two scan minima further apart than two cells whose values differ by
  /// less than tie_tolerance * max(1, |S|) mark the node as multivalued.
  double tie_tolerance = 1e-9;
};

struct MinPlusSolution {
  Grid grid;
  double time;
  RealField S;
  std::vector<Point> argmin;
  std::vector<std::uint8_t> multivalued;  // crossing characteristics
  std::vector<std::uint8_t> boundary;     // minimizer on the edge of the scan
  std::size_t multivalued_count = 0;
};

/// Throws CausticError / UnsupportedPotential from the classical action.
MinPlusSolution hopf_lax_solve(const ScalarFunction& s0, const PotentialSpec& potential, double t, const Grid& grid,
                               const ScanGrid& x0_grid, const HopfLaxOptions& options = {});

/// S0 given on a grid; evaluated off-node by tensor cubic Lagrange
/// interpolation (exact for polynomials up to degree 3). The scan grid
/// must lie inside the grid's node range.
MinPlusSolution hopf_lax_solve(const RealField& s0, const PotentialSpec& potential, double t,
                               const ScanGrid& x0_grid, const HopfLaxOptions& options = {});

/// Cubic Lagrange interpolant of a grid field.
ScalarFunction cubic_interpolant(const RealField& field);

/// dS/dt + |grad S|^2 / 2m + V at the middle snapshot, by centered
/// differences in time and space. Edge nodes and nodes flagged (or next to
/// a flagged node) in any snapshot hold NaN. The three times must be
/// equally spaced.
RealField hj_residual(const MinPlusSolution& before, const MinPlusSolution& at, const MinPlusSolution& after,
                      const PotentialSpec& potential);

/// Momentum grad_x S_cl(x, t; x0*) of the characteristic arriving at each
/// node.
std::vector<Point> characteristic_momentum(const MinPlusSolution& sol, const PotentialSpec& potential);

/// rho0(x0*(x)) |det dx0*/dx| with the Jacobian of the argmin map taken by
/// centered differences. NaN at edge nodes or near flagged nodes.
RealField transport_density(const MinPlusSolution& sol, const ScalarFunction& rho0);

/// grad S0 / m by fourth-order central differences.
VectorFunction velocity_from_action(const ScalarFunction& s0, double mass, double step = 1e-4);

/// Classical paths from given starting points and initial velocities.
TrajectoryEnsemble classical_ensemble(const std::vector<Point>& initial, const VectorFunction& initial_velocity,
                                      const PotentialSpec& potential, std::size_t dim,
                                      const std::vector<double>& times);

/// Histogram of live particle positions on the grid's cells (nearest node),
/// normalized by the total particle count.
RealField histogram_density(const TrajectoryEnsemble& ensemble, std::size_t time_index, const Grid& grid);

struct ClassicalDensity {
  std::vector<double> times;
  std::vector<RealField> rho;
  std::string method = "characteristics_histogram";
  TrajectoryEnsemble particles;
};

/// Samples n particles from rho0 (same sampler and seed discipline as the
/// Bohm ensembles), moves them classically with v(0) = grad S0 / m and bins
/// them at every time.
ClassicalDensity evolve_classical_density(const RealField& rho0, const VectorFunction& initial_velocity,
                                          const PotentialSpec& potential, const std::vector<double>& times,
                                          std::size_t n, std::uint64_t seed);

struct DeterministSolution {
  double mass = 0;
  std::vector<double> times;
  std::vector<Point> xi;
  std::vector<Point> xi_dot;
  std::vector<double> g;              // by quadrature
  std::vector<double> action_on_path; // S(xi(t), t)
  std::vector<double> hj_residual;    // dS/dt + |grad S|^2 / 2m + V at x = xi(t)
  std::vector<double> velocity_residual;  // |xi' - grad S(xi) / m|

  /// m xi'(t_k) . x + g(t_k).
  double action(std::size_t time_index, const Point& x) const;
};

/// Throws UnsupportedPotential for anything but the oscillator.
DeterministSolution determinist_solution(const PotentialSpec& potential, std::size_t dim, const Point& x0,
                                         const Point& v0, const std::vector<double>& times);

}  // namespace semiclassical
