#pragma once

// Scenario files: plain text, "[section]" headers and "key = value" lines,
// '#' starts a comment. Every number is in the unit system named by
// scenario.units (natural or atomic: hbar, mass and lengths are pure numbers
// in that system). See README for the key reference.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "semiclassical/grid.hpp"
#include "semiclassical/potentials.hpp"
#include "semiclassical/trajectories.hpp"

namespace semiclassical {

enum class ScenarioKind { statistical, determinist };

const char* to_string(ScenarioKind kind) noexcept;

/// Gaussian initial data of the statistical case:
///   rho0 = N exp(-sum_a (x_a - c_a)^2 / (2 w_a^2)),
///   S0   = m v . x + m chirp |x - c|^2 / 2.
/// Neither depends on hbar.
struct PacketSpec {
  Point center{0.0, 0.0};
  Point width{1.0, 1.0};
  Point velocity{0.0, 0.0};
  double chirp = 0.0;

  double density(const Point& x, std::size_t dim) const;
  double action(const Point& x, double mass) const;
  Point initial_velocity(const Point& x) const;
};

struct Scenario {
  std::string name;
  ScenarioKind kind = ScenarioKind::statistical;
  std::string units = "natural";
  std::uint64_t seed = 0;

  std::size_t dim = 1;
  Point extent{0.0, 0.0};
  std::array<std::size_t, kMaxDim> points{0, 0};  // 0 = chosen from the resolution rule
  std::size_t min_points = 64;
  std::size_t max_points = 32768;

  PotentialSpec potential = PotentialSpec::free(1.0);

  PacketSpec packet;           // statistical
  Point coherent_x0{0.0, 0.0};  // determinist
  Point coherent_v0{0.0, 0.0};

  double hbar_base = 1.0;
  std::vector<double> hbar_divisors{1.0};

  double t_final = 1.0;
  std::size_t outputs = 100;
  double dt = 0.0;  // 0 = automatic
  double max_kinetic_phase = 0.5;
  std::size_t min_steps_per_output = 1;
  std::size_t particles = 100;
  std::size_t equivariance_particles = 0;
  std::size_t bohm_substeps = 4;
  double rho_floor_relative = 1e-12;
  double absorber_width = 0.0;
  std::optional<SpinAxis> spin;
  std::size_t scan_points = 2001;
  std::size_t classical_points = 1024;
  double action_window = 0.1;
  std::size_t trajectory_export = 100;
  bool dump_fields = true;

  /// Resolved "section.key = value" lines in a fixed order; the run
  /// manifest hashes this text.
  std::string echo() const;
};

using Override = std::pair<std::string, std::string>;

/// Parses and validates. Throws ConfigError naming the field (and line when
/// it comes from the file). Overrides use "section.key", "section_key" or a
/// bare key that is unique across sections.
Scenario parse_scenario(const std::string& text, const std::vector<Override>& overrides = {});
Scenario load_scenario(const std::string& path, const std::vector<Override>& overrides = {});

/// Grid, time step and resolution verdict for one hbar rung.
struct RungPlan {
  double divisor;
  double hbar;
  Grid grid;
  double v_max;
  double wavelength;
  std::vector<std::size_t> required_points;
  bool resolved;
  double dt;
  std::size_t steps_per_output;
  std::size_t outputs;
  double kinetic_phase;
};

/// Throws ResolutionError naming the rung and the grid size it needs when a
/// rung cannot be resolved within max_points or the given point count.
std::vector<RungPlan> plan_rungs(const Scenario& scenario);

/// Plans without throwing; unresolved rungs have resolved == false.
std::vector<RungPlan> plan_rungs_unchecked(const Scenario& scenario);

/// Nearest known key to `key` by edit distance, for diagnostics.
std::string nearest_key(const std::string& key);

}  // namespace semiclassical
