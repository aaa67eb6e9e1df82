#pragma once

// psi = sqrt(rho) exp(i S / hbar): density, unwrapped action and quantum
// potential on the grid, plus pointwise residuals of the Madelung pair
//   dS/dt + |grad S|^2 / 2m + V + Q = 0,   drho/dt + div(rho grad S / m) = 0.

#include <cstdint>
#include <optional>
#include <vector>

#include "semiclassical/grid.hpp"
#include "semiclassical/potentials.hpp"

namespace semiclassical {

struct DecomposeOptions {
  /// Absolute density floor. When unset, rho_floor_relative * max(rho).
  std::optional<double> rho_floor;
  double rho_floor_relative = 1e-12;
  /// When false, an above-floor region made of several components throws
  /// DisconnectedSupport. When true each component is unwrapped on its own
  /// and the result is flagged.
  bool allow_disconnected = false;
};

/// Undefined entries (below the floor) hold NaN.
struct MadelungFields {
  Grid grid;
  double hbar;
  double mass;
  double time;
  double rho_floor;
  RealField rho;
  RealField action;
  RealField qpotential;
  std::vector<RealField> action_gradient;   // hbar Im(psi* grad psi) / |psi|^2
  std::vector<RealField> density_gradient;  // 2 Re(psi* grad psi)
  std::vector<std::uint8_t> valid;          // rho >= rho_floor
  std::vector<int> component;               // -1 below the floor
  std::size_t components = 0;
  std::size_t seed = 0;  // flood-fill start (density maximum)
  /// Elementary grid plaquettes inside the support whose wrapped phase
  /// differences sum to a nonzero multiple of 2 pi.
  std::size_t vortices = 0;

  bool disconnected() const noexcept { return components > 1; }
  /// Throws DisconnectedSupport when disconnected().
  void require_connected() const;
  /// Fraction of nodes above the floor.
  double coverage() const;
};

MadelungFields decompose(const WaveField& psi, const DecomposeOptions& options = {});

/// Fields for a given (rho, S) pair: builds psi from them, decomposes it and
/// shifts the action by a multiple of 2 pi hbar to agree with `action` at
/// the seed.
MadelungFields madelung_from(const RealField& rho, const RealField& action, double hbar, double mass,
                             double time, const DecomposeOptions& options = {});

/// sqrt(rho) exp(i S / hbar), zero where the action is undefined.
std::vector<Complex> reconstruct(const MadelungFields& fields);

/// Shifts the action by the multiple of 2 pi hbar that brings its value at
/// `node` closest to `reference`.
void align_action(MadelungFields& fields, std::size_t node, double reference);

/// Q at an arbitrary point from the trigonometric interpolant of sqrt(rho).
double quantum_potential_at(const MadelungFields& fields, const Point& x);

struct MadelungResiduals {
  RealField hamilton_jacobi;  // NaN outside the common region
  RealField continuity;
  double coverage;            // fraction of nodes where both are defined
  double time;                // midpoint
  double hj_max;
  double continuity_max;
};

/// Residuals at the midpoint of two snapshots: centered time difference,
/// spectral space derivatives, space terms averaged over both snapshots.
MadelungResiduals madelung_residuals(const MadelungFields& before, const MadelungFields& after,
                                     const PotentialSpec& potential);

}  // namespace semiclassical
