#include "semiclassical/madelung.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <numeric>

#include "semiclassical/errors.hpp"

namespace semiclassical {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double wrap(double a) {
  // Into (-pi, pi].
  a = std::remainder(a, 2.0 * std::numbers::pi);
  if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

// Non-periodic grid neighbors of a node.
std::size_t neighbors(const Grid& g, std::size_t f, std::array<std::size_t, 4>& out) {
  const auto idx = g.multi_index(f);
  std::size_t n = 0;
  for (std::size_t a = 0; a < g.dim(); ++a) {
    if (idx[a] > 0) out[n++] = f - g.stride(a);
    if (idx[a] + 1 < g.points(a)) out[n++] = f + g.stride(a);
  }
  return n;
}

std::size_t count_vortices(const Grid& g, const std::vector<double>& phase, const std::vector<std::uint8_t>& valid) {
  if (g.dim() != 2) return 0;
  std::size_t count = 0;
  for (std::size_t i = 0; i + 1 < g.points(0); ++i) {
    for (std::size_t j = 0; j + 1 < g.points(1); ++j) {
      const std::size_t c[4] = {g.flat_index(i, j), g.flat_index(i + 1, j), g.flat_index(i + 1, j + 1),
                                g.flat_index(i, j + 1)};
      if (!(valid[c[0]] && valid[c[1]] && valid[c[2]] && valid[c[3]])) continue;
      double s = 0;
      for (int k = 0; k < 4; ++k) s += wrap(phase[c[(k + 1) % 4]] - phase[c[k]]);
      if (std::abs(s) > std::numbers::pi) ++count;
    }
  }
  return count;
}

std::vector<double> spectral_divergence(const Grid& g, const std::vector<std::vector<double>>& comps) {
  std::vector<double> out(g.size(), 0.0);
  for (std::size_t a = 0; a < g.dim(); ++a) {
    std::vector<Complex> c(comps[a].begin(), comps[a].end());
    const auto d = gradient(g, c);
    for (std::size_t f = 0; f < g.size(); ++f) out[f] += d[a][f].real();
  }
  return out;
}

}  // namespace

void MadelungFields::require_connected() const {
  if (disconnected()) {
    throw DisconnectedSupport("above-floor region has " + std::to_string(components) +
                              " components; their phases are not comparable");
  }
}

double MadelungFields::coverage() const {
  const auto n = std::count(valid.begin(), valid.end(), std::uint8_t{1});
  return static_cast<double>(n) / static_cast<double>(valid.size());
}

MadelungFields decompose(const WaveField& psi, const DecomposeOptions& options) {
  const Grid& g = psi.grid;
  const std::size_t n = g.size();
  std::vector<double> rho(n), phase(n);
  for (std::size_t f = 0; f < n; ++f) {
    rho[f] = std::norm(psi.values[f]);
    phase[f] = std::arg(psi.values[f]);
  }
  const double rho_max = *std::max_element(rho.begin(), rho.end());
  if (!(rho_max > 0)) throw InvalidArgument("cannot decompose a zero wave field");
  const double floor = options.rho_floor ? *options.rho_floor : options.rho_floor_relative * rho_max;
  if (!(floor > 0)) throw InvalidArgument("rho_floor must be positive");

  MadelungFields out{g,
                     psi.hbar,
                     psi.mass,
                     psi.time,
                     floor,
                     RealField(g, rho, FieldUnits::density),
                     RealField(g, std::vector<double>(n, kNaN), FieldUnits::action),
                     RealField(g, std::vector<double>(n, kNaN), FieldUnits::energy),
                     {},
                     {},
                     std::vector<std::uint8_t>(n, 0),
                     std::vector<int>(n, -1)};
  for (std::size_t f = 0; f < n; ++f) out.valid[f] = rho[f] >= floor ? 1 : 0;

  // Seeds in decreasing density; ties broken by node index.
  std::vector<std::size_t> order;
  for (std::size_t f = 0; f < n; ++f) {
    if (out.valid[f]) order.push_back(f);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rho[a] > rho[b]; });
  out.seed = order.front();

  auto& action = out.action.values;
  std::deque<std::size_t> queue;
  std::array<std::size_t, 4> nb{};
  for (std::size_t s : order) {
    if (out.component[s] >= 0) continue;
    const int id = static_cast<int>(out.components++);
    out.component[s] = id;
    action[s] = psi.hbar * phase[s];
    queue.push_back(s);
    while (!queue.empty()) {
      const std::size_t f = queue.front();
      queue.pop_front();
      const std::size_t count = neighbors(g, f, nb);
      for (std::size_t k = 0; k < count; ++k) {
        const std::size_t q = nb[k];
        if (!out.valid[q] || out.component[q] >= 0) continue;
        out.component[q] = id;
        action[q] = action[f] + psi.hbar * wrap(phase[q] - phase[f]);
        queue.push_back(q);
      }
    }
  }
  if (out.components > 1 && !options.allow_disconnected) out.require_connected();
  out.vortices = count_vortices(g, phase, out.valid);

  const auto dpsi = gradient(g, psi.values);
  for (std::size_t a = 0; a < g.dim(); ++a) {
    RealField sg(g, std::vector<double>(n, kNaN), FieldUnits::velocity);
    RealField rg(g, std::vector<double>(n, kNaN), FieldUnits::dimensionless);
    for (std::size_t f = 0; f < n; ++f) {
      if (!out.valid[f]) continue;
      const Complex z = std::conj(psi.values[f]) * dpsi[a][f];
      sg.values[f] = psi.hbar * z.imag() / rho[f];
      rg.values[f] = 2.0 * z.real();
    }
    out.action_gradient.push_back(std::move(sg));
    out.density_gradient.push_back(std::move(rg));
  }

  std::vector<Complex> amp(n);
  for (std::size_t f = 0; f < n; ++f) amp[f] = std::sqrt(rho[f]);
  const auto lap = laplacian(g, amp);
  const double c = -psi.hbar * psi.hbar / (2.0 * psi.mass);
  for (std::size_t f = 0; f < n; ++f) {
    if (out.valid[f]) out.qpotential.values[f] = c * lap[f].real() / amp[f].real();
  }
  return out;
}

MadelungFields madelung_from(const RealField& rho, const RealField& action, double hbar, double mass,
                             double time, const DecomposeOptions& options) {
  if (!(rho.grid == action.grid)) throw InvalidArgument("density and action grids differ");
  std::vector<Complex> v(rho.grid.size());
  for (std::size_t f = 0; f < v.size(); ++f) v[f] = std::polar(std::sqrt(rho.values[f]), action.values[f] / hbar);
  MadelungFields out = decompose(WaveField(rho.grid, std::move(v), hbar, mass, time), options);
  align_action(out, out.seed, action.values[out.seed]);
  return out;
}

std::vector<Complex> reconstruct(const MadelungFields& fields) {
  std::vector<Complex> out(fields.grid.size(), Complex(0.0, 0.0));
  for (std::size_t f = 0; f < out.size(); ++f) {
    if (fields.valid[f]) out[f] = std::polar(std::sqrt(fields.rho.values[f]), fields.action.values[f] / fields.hbar);
  }
  return out;
}

void align_action(MadelungFields& fields, std::size_t node, double reference) {
  if (node >= fields.grid.size() || !fields.valid[node]) throw InvalidArgument("alignment node is undefined");
  const double period = 2.0 * std::numbers::pi * fields.hbar;
  const double shift = period * std::round((reference - fields.action.values[node]) / period);
  for (auto& s : fields.action.values) s += shift;  // NaN stays NaN
}

double quantum_potential_at(const MadelungFields& fields, const Point& x) {
  std::vector<double> amp(fields.grid.size());
  for (std::size_t f = 0; f < amp.size(); ++f) amp[f] = std::sqrt(fields.rho.values[f]);
  const auto s = evaluate_spectral(fields.grid, amp, x);
  if (!(s.value > 0)) throw InvalidArgument("quantum potential requested where the density vanishes");
  return -fields.hbar * fields.hbar / (2.0 * fields.mass) * s.laplacian / s.value;
}

MadelungResiduals madelung_residuals(const MadelungFields& a, const MadelungFields& b, const PotentialSpec& potential) {
  if (!(a.grid == b.grid)) throw InvalidArgument("snapshots are on different grids");
  if (a.hbar != b.hbar || a.mass != b.mass) throw InvalidArgument("snapshots have different hbar or mass");
  if (!(b.time > a.time)) throw InvalidArgument("second snapshot must be later than the first");
  const Grid& g = a.grid;
  const std::size_t n = g.size();
  const double dt = b.time - a.time;
  const double m = a.mass;

  // Bring b's action onto the branch that the Hamilton-Jacobi equation
  // predicts from a at a common node. Plain nearest-branch alignment fails
  // once |dS/dt| dt exceeds pi hbar.
  std::size_t ref = a.seed;
  if (!b.valid[ref]) ref = b.seed;
  if (!a.valid[ref]) throw InvalidArgument("snapshots have no common above-floor node at their seeds");
  const double period = 2.0 * std::numbers::pi * a.hbar;
  double predicted = a.action.values[ref];
  {
    double ga = 0, gb = 0;
    for (std::size_t d = 0; d < g.dim(); ++d) {
      ga += a.action_gradient[d].values[ref] * a.action_gradient[d].values[ref];
      gb += b.action_gradient[d].values[ref] * b.action_gradient[d].values[ref];
    }
    const double mid = 0.5 * (a.time + b.time);
    predicted -= dt * (0.25 * (ga + gb) / m + potential.value(g.node(ref), mid) +
                       0.5 * (a.qpotential.values[ref] + b.qpotential.values[ref]));
  }
  const double shift = period * std::round((predicted - b.action.values[ref]) / period);

  std::vector<std::vector<double>> ja(g.dim(), std::vector<double>(n, 0.0)), jb = ja;
  for (std::size_t d = 0; d < g.dim(); ++d) {
    for (std::size_t f = 0; f < n; ++f) {
      if (a.valid[f]) ja[d][f] = a.rho.values[f] * a.action_gradient[d].values[f] / m;
      if (b.valid[f]) jb[d][f] = b.rho.values[f] * b.action_gradient[d].values[f] / m;
    }
  }
  const auto diva = spectral_divergence(g, ja);
  const auto divb = spectral_divergence(g, jb);

  MadelungResiduals out{RealField(g, std::vector<double>(n, kNaN), FieldUnits::energy),
                        RealField(g, std::vector<double>(n, kNaN), FieldUnits::dimensionless),
                        0.0, 0.5 * (a.time + b.time), 0.0, 0.0};
  std::size_t defined = 0;
  for (std::size_t f = 0; f < n; ++f) {
    if (!a.valid[f] || !b.valid[f] || a.component[f] != 0 || b.component[f] != 0) continue;
    ++defined;
    double ga = 0, gb = 0;
    for (std::size_t d = 0; d < g.dim(); ++d) {
      ga += a.action_gradient[d].values[f] * a.action_gradient[d].values[f];
      gb += b.action_gradient[d].values[f] * b.action_gradient[d].values[f];
    }
    const double dsdt = (b.action.values[f] + shift - a.action.values[f]) / dt;
    const double hj = dsdt + 0.25 * (ga + gb) / m + potential.value(g.node(f), out.time) +
                      0.5 * (a.qpotential.values[f] + b.qpotential.values[f]);
    const double cont = (b.rho.values[f] - a.rho.values[f]) / dt + 0.5 * (diva[f] + divb[f]);
    out.hamilton_jacobi.values[f] = hj;
    out.continuity.values[f] = cont;
    out.hj_max = std::max(out.hj_max, std::abs(hj));
    out.continuity_max = std::max(out.continuity_max, std::abs(cont));
  }
  out.coverage = static_cast<double>(defined) / static_cast<double>(n);
  return out;
}

}  // namespace semiclassical
