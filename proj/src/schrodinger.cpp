#include "semiclassical/schrodinger.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "semiclassical/errors.hpp"

namespace semiclassical {

double kinetic_phase_per_step(const Grid& grid, double hbar, double mass, double dt) {
  return hbar * grid.max_k_squared() * dt / (2.0 * mass);
}

Propagator::Propagator(const Grid& grid, double hbar, double mass, const PotentialSpec& potential,
                       PropagatorConfig cfg)
    : grid_(grid), hbar_(hbar), mass_(mass), cfg_(std::move(cfg)) {
  if (!(hbar > 0)) throw InvalidArgument("hbar must be positive");
  if (!(mass > 0)) throw InvalidArgument("mass must be positive");
  if (!(cfg_.dt > 0) || !std::isfinite(cfg_.dt)) throw InvalidArgument("dt must be positive");
  if (cfg_.steps_per_output == 0) throw InvalidArgument("steps_per_output must be positive");
  if (cfg_.boundary_mask) {
    if (!(cfg_.boundary_mask->grid == grid)) throw InvalidArgument("boundary mask grid does not match");
    for (double m : cfg_.boundary_mask->values) {
      if (!(m >= 0.0 && m <= 1.0)) throw InvalidArgument("boundary mask values must lie in [0, 1]");
    }
  }
  const double phase = kinetic_phase_per_step(grid, hbar, mass, cfg_.dt);
  if (!potential.spatially_uniform() && phase >= std::numbers::pi) {
    const double dt_max = 2.0 * mass * std::numbers::pi / (hbar * grid.max_k_squared());
    std::ostringstream msg;
    msg << "kinetic phase per step " << phase << " >= pi; use dt < " << dt_max;
    throw AliasingError(msg.str());
  }

  const double dt = cfg_.dt;
  const std::size_t n = grid.size();
  kinetic_.resize(n);
  half_potential_.resize(n);
  full_potential_.resize(n);
  for (std::size_t f = 0; f < n; ++f) {
    const auto idx = grid.multi_index(f);
    double k2 = 0;
    for (std::size_t a = 0; a < grid.dim(); ++a) {
      const double k = grid.wavenumbers(a)[idx[a]];
      k2 += k * k;
    }
    kinetic_[f] = std::polar(1.0, -hbar * k2 * dt / (2.0 * mass));
    const double v = potential.value(grid.node(f));
    half_potential_[f] = std::polar(1.0, -v * dt / (2.0 * hbar));
    full_potential_[f] = std::polar(1.0, -v * dt / hbar);
  }
  if (potential.spatially_uniform()) {
    // Exact constant phase; avoids a tiny spatially varying rounding pattern.
    std::fill(half_potential_.begin(), half_potential_.end(), half_potential_.front());
    std::fill(full_potential_.begin(), full_potential_.end(), full_potential_.front());
  }
}

void Propagator::check(const WaveField& psi) const {
  if (!(psi.grid == grid_)) throw InvalidArgument("wave field grid does not match the propagator");
  if (psi.hbar != hbar_ || psi.mass != mass_) {
    throw InvalidArgument("wave field hbar/mass do not match the propagator");
  }
}

void Propagator::step(WaveField& psi) const { advance(psi, 1); }

double Propagator::advance(WaveField& psi, std::size_t n) const {
  check(psi);
  if (n == 0) return 0.0;
  const double before = cfg_.boundary_mask ? l2_norm(psi) : 0.0;
  auto& v = psi.values;
  const std::size_t size = v.size();
  const double* mask = cfg_.boundary_mask ? cfg_.boundary_mask->values.data() : nullptr;
  for (std::size_t f = 0; f < size; ++f) v[f] *= half_potential_[f];
  for (std::size_t s = 0; s < n; ++s) {
    forward_transform(grid_, v);
    for (std::size_t f = 0; f < size; ++f) v[f] *= kinetic_[f];
    inverse_transform(grid_, v);
    const auto& pot = (s + 1 == n) ? half_potential_ : full_potential_;
    if (mask) {
      for (std::size_t f = 0; f < size; ++f) v[f] *= pot[f] * mask[f];
    } else {
      for (std::size_t f = 0; f < size; ++f) v[f] *= pot[f];
    }
  }
  psi.time += static_cast<double>(n) * cfg_.dt;
  if (!mask) return 0.0;
  const double after = l2_norm(psi);
  return before * before - after * after;
}

WaveField step(const WaveField& psi, const PotentialSpec& potential, const PropagatorConfig& cfg) {
  Propagator prop(psi.grid, psi.hbar, psi.mass, potential, cfg);
  WaveField out = psi;
  prop.step(out);
  return out;
}

double energy(const WaveField& psi, const PotentialSpec& potential) {
  const Grid& g = psi.grid;
  std::vector<Complex> c = psi.values;
  forward_transform(g, c);
  double kinetic = 0;
  for (std::size_t f = 0; f < g.size(); ++f) {
    const auto idx = g.multi_index(f);
    double k2 = 0;
    for (std::size_t a = 0; a < g.dim(); ++a) {
      const double k = g.wavenumbers(a)[idx[a]];
      k2 += k * k;
    }
    kinetic += k2 * std::norm(c[f]);
  }
  kinetic *= psi.hbar * psi.hbar / (2.0 * psi.mass) * g.cell_volume() / static_cast<double>(g.size());
  double pot = 0;
  for (std::size_t f = 0; f < g.size(); ++f) pot += potential.value(g.node(f)) * std::norm(psi.values[f]);
  return kinetic + pot * g.cell_volume();
}

Point center_of_mass(const WaveField& psi) {
  Point c{0.0, 0.0};
  double total = 0;
  for (std::size_t f = 0; f < psi.grid.size(); ++f) {
    const double w = std::norm(psi.values[f]);
    const Point x = psi.grid.node(f);
    for (std::size_t a = 0; a < psi.grid.dim(); ++a) c[a] += w * x[a];
    total += w;
  }
  if (total > 0) {
    for (auto& v : c) v /= total;
  }
  return c;
}

std::size_t output_count(const PropagatorConfig& cfg, double t_final) {
  if (!(t_final > 0)) throw InvalidArgument("t_final must be positive");
  const double interval = cfg.dt * static_cast<double>(cfg.steps_per_output);
  const double ratio = t_final / interval;
  const double n = std::round(ratio);
  if (n < 1 || std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio)) {
    std::ostringstream msg;
    msg << "t_final " << t_final << " is not a multiple of dt * steps_per_output = " << interval;
    throw InvalidArgument(msg.str());
  }
  return static_cast<std::size_t>(n);
}

void evolve_streaming(const WaveField& psi0, const PotentialSpec& potential, const PropagatorConfig& cfg,
                      double t_final, const SnapshotCallback& callback) {
  const std::size_t outputs = output_count(cfg, t_final);
  Propagator prop(psi0.grid, psi0.hbar, psi0.mass, potential, cfg);
  WaveField psi = psi0;
  const double t0 = psi0.time;
  double absorbed = 0;
  auto observe = [&]() {
    return Observation{psi.time, l2_norm(psi), energy(psi, potential), center_of_mass(psi), absorbed};
  };
  if (!callback(psi, observe())) return;
  for (std::size_t o = 1; o <= outputs; ++o) {
    absorbed += prop.advance(psi, cfg.steps_per_output);
    // Time from the step count, not accumulated increments.
    psi.time = t0 + static_cast<double>(o * cfg.steps_per_output) * cfg.dt;
    if (!callback(psi, observe())) return;
  }
}

Evolution evolve(const WaveField& psi0, const PotentialSpec& potential, const PropagatorConfig& cfg,
                 double t_final) {
  Evolution out;
  evolve_streaming(psi0, potential, cfg, t_final, [&](const WaveField& psi, const Observation& obs) {
    out.snapshots.push_back(psi);
    out.observations.push_back(obs);
    return true;
  });
  return out;
}

std::size_t fft_size_at_least(std::size_t n) {
  std::size_t p = 8;
  while (p < n) p *= 2;
  return p;
}

ResolutionCheck check_resolution(const Grid& grid, double hbar, double mass, double v_max,
                                 double points_per_wavelength) {
  if (!(hbar > 0) || !(mass > 0)) throw InvalidArgument("hbar and mass must be positive");
  ResolutionCheck out{true, std::numeric_limits<double>::infinity(), {}};
  if (v_max > 0) out.wavelength = 2.0 * std::numbers::pi * hbar / (mass * v_max);
  for (std::size_t a = 0; a < grid.dim(); ++a) {
    std::size_t need = 8;
    if (std::isfinite(out.wavelength)) {
      const double nodes = std::ceil(grid.extent(a) * points_per_wavelength / out.wavelength);
      need = static_cast<std::size_t>(std::max(8.0, nodes));
      need += need % 2;
    }
    out.required_points.push_back(need);
    if (grid.points(a) < need) out.ok = false;
  }
  return out;
}

RealField absorbing_mask(const Grid& grid, double width) {
  if (!(width > 0)) throw InvalidArgument("absorber width must be positive");
  RealField out(grid, FieldUnits::dimensionless);
  for (std::size_t f = 0; f < grid.size(); ++f) {
    const Point x = grid.node(f);
    double m = 1.0;
    for (std::size_t a = 0; a < grid.dim(); ++a) {
      const double half = 0.5 * grid.extent(a);
      const double d = half - std::abs(x[a]);  // distance to the nearest edge
      if (d < width) m *= std::pow(std::cos(0.5 * std::numbers::pi * (1.0 - d / width)), 0.125);
    }
    out.values[f] = std::clamp(m, 0.0, 1.0);
  }
  return out;
}

}  // namespace semiclassical
