#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "semiclassical/grid.hpp"

namespace semiclassical {

enum class TrajectoryKind { bohm, bohm_spin, classical };

const char* to_string(TrajectoryKind kind) noexcept;

/// Unit vector k of the spin-augmented velocity field, in 3D coordinates.
using SpinAxis = std::array<double, 3>;

/// +1 for k = e_z, -1 for k = -e_z. Throws SpinAxisUnsupported outside two
/// dimensions or for any other axis.
double spin_orientation(const SpinAxis& axis, std::size_t dim);

/// Time-stamped particle paths sharing one time base. A particle that is
/// absorbed keeps its last position (and zero velocity) from then on.
class TrajectoryEnsemble {
 public:
  TrajectoryEnsemble(std::size_t dim, TrajectoryKind kind, std::vector<double> times, std::size_t particles);

  std::size_t dim() const noexcept { return dim_; }
  TrajectoryKind kind() const noexcept { return kind_; }
  const std::vector<double>& times() const noexcept { return times_; }
  std::size_t particle_count() const noexcept { return particles_; }
  std::size_t time_count() const noexcept { return times_.size(); }

  Point position(std::size_t time_index, std::size_t particle) const;
  Point velocity(std::size_t time_index, std::size_t particle) const;
  void set(std::size_t time_index, std::size_t particle, const Point& x, const Point& v);

  /// Index of the first output time at which the particle was found absorbed.
  std::optional<std::size_t> absorbed_at(std::size_t particle) const { return absorbed_at_[particle]; }
  bool absorbed(std::size_t particle) const { return absorbed_at_[particle].has_value(); }
  /// Marks the particle absorbed at time_index and freezes the remaining path.
  void absorb(std::size_t particle, std::size_t time_index);

  /// Keeps only the first n particles.
  TrajectoryEnsemble head(std::size_t n) const;

 private:
  std::size_t offset(std::size_t t, std::size_t p) const { return (t * particles_ + p) * dim_; }

  std::size_t dim_;
  TrajectoryKind kind_;
  std::vector<double> times_;
  std::size_t particles_;
  std::vector<double> positions_;
  std::vector<double> velocities_;
  std::vector<std::optional<std::size_t>> absorbed_at_;
};

}  // namespace semiclassical
