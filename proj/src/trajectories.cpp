#include "semiclassical/trajectories.hpp"

#include <algorithm>
#include <cmath>

#include "semiclassical/errors.hpp"

namespace semiclassical {

const char* to_string(TrajectoryKind kind) noexcept {
  switch (kind) {
    case TrajectoryKind::bohm: return "bohm";
    case TrajectoryKind::bohm_spin: return "bohm_spin";
    case TrajectoryKind::classical: return "classical";
  }
  return "unknown";
}

double spin_orientation(const SpinAxis& axis, std::size_t dim) {
  if (dim != 2) throw SpinAxisUnsupported("the spin term needs a two-dimensional configuration space");
  const double tol = 1e-12;
  if (std::abs(axis[0]) < tol && std::abs(axis[1]) < tol && std::abs(std::abs(axis[2]) - 1.0) < tol) {
    return axis[2] > 0 ? 1.0 : -1.0;
  }
  throw SpinAxisUnsupported("spin axis must be perpendicular to the plane (0, 0, +-1)");
}

TrajectoryEnsemble::TrajectoryEnsemble(std::size_t dim, TrajectoryKind kind, std::vector<double> times,
                                       std::size_t particles)
    : dim_(dim), kind_(kind), times_(std::move(times)), particles_(particles) {
  if (dim_ < 1 || dim_ > kMaxDim) throw InvalidArgument("trajectory dimension must be 1 or 2");
  for (std::size_t i = 1; i < times_.size(); ++i) {
    if (!(times_[i] > times_[i - 1])) throw InvalidArgument("trajectory times must be strictly increasing");
  }
  positions_.assign(times_.size() * particles_ * dim_, 0.0);
  velocities_.assign(times_.size() * particles_ * dim_, 0.0);
  absorbed_at_.assign(particles_, std::nullopt);
}

Point TrajectoryEnsemble::position(std::size_t t, std::size_t p) const {
  Point x{0.0, 0.0};
  const auto o = offset(t, p);
  for (std::size_t a = 0; a < dim_; ++a) x[a] = positions_[o + a];
  return x;
}

Point TrajectoryEnsemble::velocity(std::size_t t, std::size_t p) const {
  Point v{0.0, 0.0};
  const auto o = offset(t, p);
  for (std::size_t a = 0; a < dim_; ++a) v[a] = velocities_[o + a];
  return v;
}

void TrajectoryEnsemble::set(std::size_t t, std::size_t p, const Point& x, const Point& v) {
  const auto o = offset(t, p);
  for (std::size_t a = 0; a < dim_; ++a) {
    if (!std::isfinite(x[a])) throw InvalidArgument("trajectory position must be finite");
    positions_[o + a] = x[a];
    velocities_[o + a] = v[a];
  }
}

void TrajectoryEnsemble::absorb(std::size_t p, std::size_t t) {
  if (absorbed_at_[p]) return;
  absorbed_at_[p] = t;
  const Point last = t > 0 ? position(t - 1, p) : position(0, p);
  for (std::size_t i = t; i < times_.size(); ++i) set(i, p, last, Point{0.0, 0.0});
}

TrajectoryEnsemble TrajectoryEnsemble::head(std::size_t n) const {
  n = std::min(n, particles_);
  TrajectoryEnsemble out(dim_, kind_, times_, n);
  for (std::size_t t = 0; t < times_.size(); ++t) {
    for (std::size_t p = 0; p < n; ++p) out.set(t, p, position(t, p), velocity(t, p));
  }
  for (std::size_t p = 0; p < n; ++p) out.absorbed_at_[p] = absorbed_at_[p];
  return out;
}

}  // namespace semiclassical
