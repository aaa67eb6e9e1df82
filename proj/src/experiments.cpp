#include "semiclassical/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "semiclassical/coherent.hpp"
#include "semiclassical/errors.hpp"
#include "semiclassical/schrodinger.hpp"

namespace semiclassical {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Regions used for residual and distance metrics, relative to max density.
constexpr double kResidualWindow = 1e-6;
constexpr std::size_t kEquivarianceMinParticles = 1000;

double wrap_phase(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  return a <= -std::numbers::pi ? a + 2.0 * std::numbers::pi : a;
}

double distance(const Point& a, const Point& b, std::size_t dim) {
  double s = 0;
  for (std::size_t d = 0; d < dim; ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
  return std::sqrt(s);
}

std::vector<double> output_times(const RungPlan& plan) {
  std::vector<double> t(plan.outputs + 1);
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = static_cast<double>(k * plan.steps_per_output) * plan.dt;
  return t;
}

std::string rung_label(const RungPlan& plan) {
  std::ostringstream os;
  os << "hbar/" << plan.divisor << " (hbar " << plan.hbar << ")";
  return os.str();
}

// Runs fn(i) for i < n on at most `jobs` threads. The first failure by
// index is rethrown after all workers finish.
template <class Fn>
void run_indexed(std::size_t n, std::size_t jobs, Fn fn) {
  std::vector<std::exception_ptr> errors(n);
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(n, 1));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void log_line(const SweepOptions& opt, const std::string& line) {
  static std::mutex m;
  if (!opt.log) return;
  std::lock_guard lock(m);
  opt.log(line);
}

PropagatorConfig propagator_config(const Scenario& s, const RungPlan& plan) {
  PropagatorConfig cfg;
  cfg.dt = plan.dt;
  cfg.steps_per_output = plan.steps_per_output;
  if (s.absorber_width > 0) cfg.boundary_mask = absorbing_mask(plan.grid, s.absorber_width);
  return cfg;
}

RungReport base_report(const RungPlan& plan) {
  RungReport r;
  r.divisor = plan.divisor;
  r.hbar = plan.hbar;
  for (std::size_t a = 0; a < plan.grid.dim(); ++a) r.points.push_back(plan.grid.points(a));
  r.dt = plan.dt;
  r.steps_per_output = plan.steps_per_output;
  r.outputs = plan.outputs;
  r.kinetic_phase = plan.kinetic_phase;
  r.v_max = plan.v_max;
  r.wavelength = plan.wavelength;
  return r;
}

// Bookkeeping shared by both sweeps for every emitted snapshot.
struct SnapshotTracker {
  bool has_mask = false;
  double energy0 = 0.0;
  std::optional<MadelungFields> previous;
  std::optional<MadelungFields> last;

  void observe(RungReport& r, const Observation& obs, std::size_t k) {
    if (k == 0) energy0 = obs.energy;
    r.norm_drift = std::max(r.norm_drift, std::abs(obs.norm * obs.norm + obs.absorbed - 1.0));
    r.absorbed_probability = obs.absorbed;
    if (!has_mask) {
      const double scale = std::max(std::abs(energy0), 1e-300);
      r.energy_drift = std::max(r.energy_drift, std::abs(obs.energy - energy0) / scale);
    }
  }

  void keep(RungReport& r, MadelungFields fields) {
    r.max_components = std::max(r.max_components, fields.components);
    r.max_vortices = std::max(r.max_vortices, fields.vortices);
    previous = std::move(last);
    last = std::move(fields);
  }

  void finish(RungReport& r, const PotentialSpec& potential) const {
    if (!previous || !last) return;
    const auto res = madelung_residuals(*previous, *last, potential);
    const auto& rho = last->rho.values;
    const double cut = kResidualWindow * *std::max_element(rho.begin(), rho.end());
    for (std::size_t f = 0; f < rho.size(); ++f) {
      if (!(rho[f] >= cut)) continue;
      if (std::isfinite(res.hamilton_jacobi.values[f])) {
        r.madelung_hj_residual = std::max(r.madelung_hj_residual, std::abs(res.hamilton_jacobi.values[f]));
      }
      if (std::isfinite(res.continuity.values[f])) {
        r.madelung_continuity_residual =
            std::max(r.madelung_continuity_residual, std::abs(res.continuity.values[f]));
      }
    }
  }
};

std::vector<Point> live_positions(const TrajectoryEnsemble& ens, std::size_t k) {
  std::vector<Point> out;
  for (std::size_t p = 0; p < ens.particle_count(); ++p) {
    const auto at = ens.absorbed_at(p);
    if (at && *at <= k) continue;
    out.push_back(ens.position(k, p));
  }
  return out;
}

std::size_t equivariance_bins(std::size_t dim) { return dim == 1 ? 16 : 4; }

void finish_bohm(RungReport& r, const TrajectoryEnsemble& ens) {
  r.bohm_particles = ens.particle_count();
  for (std::size_t p = 0; p < ens.particle_count(); ++p) r.bohm_absorbed += ens.absorbed(p) ? 1 : 0;
  if (ens.particle_count() > 0) r.final_dispersion = dispersion(ens, ens.time_count() - 1);
}

std::vector<double> rung_values(const std::vector<RungReport>& rungs, const std::vector<std::size_t>& order,
                                const std::function<std::optional<double>(const RungReport&)>& get) {
  std::vector<double> v;
  for (auto i : order) v.push_back(get(rungs[i]).value_or(kNaN));
  return v;
}

// Rung indices sorted by decreasing hbar.
std::vector<std::size_t> by_decreasing_hbar(const std::vector<RungReport>& rungs) {
  std::vector<std::size_t> order(rungs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return rungs[a].hbar > rungs[b].hbar; });
  return order;
}

void add_slope(ConvergenceReport& rep, const std::string& name, const std::vector<std::size_t>& order,
               const std::function<std::optional<double>(const RungReport&)>& get) {
  std::vector<double> h;
  for (auto i : order) h.push_back(rep.rungs[i].hbar);
  const auto y = rung_values(rep.rungs, order, get);
  rep.slopes.emplace_back(name, fit_loglog(h, y));
}

ConvergenceReport report_header(const Scenario& s) {
  ConvergenceReport rep;
  rep.scenario = s.name;
  rep.kind = s.kind;
  rep.dim = s.dim;
  rep.seed = s.seed;
  rep.t_final = s.t_final;
  rep.potential = s.potential.describe();
  return rep;
}

}  // namespace

const std::vector<TestFunction>& weak_battery() {
  static const std::vector<TestFunction> battery = {
      {"square_norm",
       [](const Point& x, std::size_t d) { return x[0] * x[0] + (d == 2 ? x[1] * x[1] : 0.0); }},
      {"cosine_sum", [](const Point& x, std::size_t d) { return std::cos(x[0]) + (d == 2 ? std::cos(x[1]) : 0.0); }},
      {"half_exponential",
       [](const Point& x, std::size_t d) { return std::exp(0.5 * (x[0] + (d == 2 ? x[1] : 0.0))); }},
      {"lorentzian",
       [](const Point& x, std::size_t d) { return 1.0 / (1.0 + x[0] * x[0] + (d == 2 ? x[1] * x[1] : 0.0)); }},
      {"log_quadratic",
       [](const Point& x, std::size_t d) { return std::log(4.0 + x[0] * x[0] + (d == 2 ? x[1] * x[1] : 0.0)); }},
  };
  return battery;
}

RealField initial_density(const Scenario& s, const Grid& grid) {
  RealField rho(grid, FieldUnits::density);
  for (std::size_t f = 0; f < grid.size(); ++f) rho.values[f] = s.packet.density(grid.node(f), s.dim);
  return rho;
}

WaveField initial_wave(const Scenario& s, const Grid& grid, double hbar) {
  const double m = s.potential.mass();
  std::vector<Complex> v(grid.size());
  for (std::size_t f = 0; f < grid.size(); ++f) {
    const Point x = grid.node(f);
    v[f] = std::polar(std::sqrt(s.packet.density(x, s.dim)), s.packet.action(x, m) / hbar);
  }
  WaveField psi(grid, std::move(v), hbar, m, 0.0);
  normalize(psi);
  return psi;
}

DoubleSlitMetrics double_slit_metrics(const TrajectoryEnsemble& ens, const DoubleSlitGeometry& g,
                                      std::uint64_t seed) {
  if (ens.dim() != 2) throw InvalidArgument("double-slit metrics need a two-dimensional ensemble");
  DoubleSlitMetrics out;
  const double wall_end = g.barrier_position + 0.5 * g.barrier_thickness + 3.0 * g.edge_width;
  const auto& times = ens.times();
  const std::size_t nt = ens.time_count();
  std::vector<double> endpoints;
  double curvature_sum = 0, deviation_sum = 0;
  std::size_t curvature_points = 0;
  for (std::size_t p = 0; p < ens.particle_count(); ++p) {
    const auto at = ens.absorbed_at(p);
    const std::size_t last = at ? (*at > 0 ? *at - 1 : 0) : nt - 1;
    const double y0 = ens.position(0, p)[1];
    for (std::size_t k = 1; k <= last; ++k) {
      if (ens.position(k, p)[1] * y0 < 0) {
        ++out.axis_crossings;
        break;
      }
    }
    if (!(ens.position(last, p)[0] > wall_end)) continue;
    ++out.transmitted;
    endpoints.push_back(ens.position(last, p)[1]);
    std::size_t e = 0;
    while (e < last && !(ens.position(e, p)[0] > wall_end)) ++e;
    const Point xe = ens.position(e, p), ve = ens.velocity(e, p);
    double dev = 0;
    for (std::size_t k = e + 1; k <= last; ++k) {
      const double s = times[k] - times[e];
      const Point line{xe[0] + ve[0] * s, xe[1] + ve[1] * s};
      dev = std::max(dev, distance(ens.position(k, p), line, 2));
    }
    deviation_sum += dev;
    for (std::size_t k = e + 1; k + 1 <= last; ++k) {
      const double h = times[k + 1] - times[k];
      const Point a = ens.position(k - 1, p), b = ens.position(k, p), c = ens.position(k + 1, p);
      const double vx = (c[0] - a[0]) / (2 * h), vy = (c[1] - a[1]) / (2 * h);
      const double ax = (c[0] - 2 * b[0] + a[0]) / (h * h), ay = (c[1] - 2 * b[1] + a[1]) / (h * h);
      const double speed = std::hypot(vx, vy);
      if (speed < 1e-12) continue;
      curvature_sum += std::abs(vx * ay - vy * ax) / (speed * speed * speed);
      ++curvature_points;
    }
  }
  out.channels = gap_statistic_clusters(endpoints, 8, 50, seed);
  if (curvature_points > 0) out.mean_curvature = curvature_sum / static_cast<double>(curvature_points);
  if (out.transmitted > 0) out.exit_deviation = deviation_sum / static_cast<double>(out.transmitted);
  return out;
}

SweepResult run_statistical_sweep(const Scenario& s, const SweepOptions& opt) {
  if (s.kind != ScenarioKind::statistical) throw InvalidArgument("scenario is not statistical");
  const auto plans = plan_rungs(s);
  const std::size_t dim = s.dim;
  const double m = s.potential.mass();
  const double T = s.t_final;

  SweepResult result;
  result.report = report_header(s);
  auto& rep = result.report;

  // One set of starting points for every rung and for the classical paths.
  const Grid sampling_grid =
      dim == 1 ? make_grid(1, std::span<const double>(s.extent.data(), 1),
                           std::vector<std::size_t>{std::max<std::size_t>(8, s.classical_points + s.classical_points % 2)})
               : plans.front().grid;
  const std::size_t n_bohm = std::max(s.particles, s.equivariance_particles);
  const std::size_t n_compared = std::min(s.particles, n_bohm);
  std::vector<Point> starts;
  if (n_bohm > 0) {
    starts = sample_initial_positions(initial_density(s, sampling_grid), n_bohm, s.seed, s.rho_floor_relative);
  }
  std::vector<double> common_times(s.outputs + 1);
  for (std::size_t k = 0; k <= s.outputs; ++k) common_times[k] = T * static_cast<double>(k) / s.outputs;

  // Classical side.
  std::optional<TrajectoryEnsemble> classical;
  if (s.potential.has_closed_form_motion() && n_compared > 0) {
    const PacketSpec packet = s.packet;
    classical = classical_ensemble(std::vector<Point>(starts.begin(), starts.begin() + n_compared),
                                   [packet](const Point& x) { return packet.initial_velocity(x); }, s.potential, dim,
                                   common_times);
    result.classical = classical->head(s.trajectory_export);
  }
  std::optional<Grid> classical_grid;
  std::optional<RealField> classical_rho;
  if (dim == 1 && s.potential.has_classical_action()) {
    log_line(opt, "classical limit: min-plus action on " + std::to_string(s.classical_points) + " nodes");
    rep.classical = ClassicalReport{};
    rep.classical->density_method = "min_plus_jacobian";
    const std::size_t cn = std::max<std::size_t>(8, s.classical_points + s.classical_points % 2);
    classical_grid = make_grid(1, std::span<const double>(s.extent.data(), 1), std::vector<std::size_t>{cn});
    const PacketSpec packet = s.packet;
    const ScalarFunction s0 = [packet, m](const Point& x) { return packet.action(x, m); };
    const ScalarFunction rho0 = [packet](const Point& x) { return packet.density(x, 1); };
    const double reach = 10.0 * packet.width[0];
    const auto scan = ScanGrid::line(packet.center[0] - reach, packet.center[0] + reach, s.scan_points);
    const double dt = 1e-3 * T;
    const auto before = hopf_lax_solve(s0, s.potential, T - dt, *classical_grid, scan);
    auto at = hopf_lax_solve(s0, s.potential, T, *classical_grid, scan);
    const auto after = hopf_lax_solve(s0, s.potential, T + dt, *classical_grid, scan);
    classical_rho = transport_density(at, rho0);
    const auto residual = hj_residual(before, at, after, s.potential);
    double rmax = 0;
    for (double v : classical_rho->values) {
      if (std::isfinite(v)) rmax = std::max(rmax, v);
    }
    double hj = 0;
    for (std::size_t f = 0; f < classical_grid->size(); ++f) {
      if (classical_rho->values[f] >= kResidualWindow * rmax && std::isfinite(residual.values[f])) {
        hj = std::max(hj, std::abs(residual.values[f]));
      }
    }
    rep.classical->hj_residual = hj;
    rep.classical->multivalued_nodes = at.multivalued_count;
    for (auto b : at.boundary) rep.classical->boundary_nodes += b;
    result.classical_density = classical_rho;
    result.classical_action = std::move(at);
  } else if (classical) {
    rep.classical = ClassicalReport{};
    rep.classical->density_method = "none";
  }

  rep.rungs.resize(plans.size());
  result.rungs.resize(plans.size(), RungOutput{TrajectoryEnsemble(dim, TrajectoryKind::bohm, {0.0}, 0), {}});

  run_indexed(plans.size(), opt.jobs, [&](std::size_t i) {
    const RungPlan& plan = plans[i];
    log_line(opt, "rung " + rung_label(plan) + ": evolving");
    RungReport r = base_report(plan);
    const auto cfg = propagator_config(s, plan);
    const RealField* mask = cfg.boundary_mask ? &*cfg.boundary_mask : nullptr;
    const auto times = output_times(plan);
    const TrajectoryKind kind = s.spin ? TrajectoryKind::bohm_spin : TrajectoryKind::bohm;
    EnsembleIntegrator integrator(starts, dim, times, kind, s.bohm_substeps);
    SnapshotTracker tracker;
    tracker.has_mask = mask != nullptr;
    std::optional<WaveField> final_psi;
    DecomposeOptions dopt;
    dopt.rho_floor_relative = s.rho_floor_relative;
    dopt.allow_disconnected = true;
    std::size_t k = 0;
    evolve_streaming(initial_wave(s, plan.grid, plan.hbar), s.potential, cfg, T,
                     [&](const WaveField& psi, const Observation& obs) {
                       tracker.observe(r, obs, k);
                       auto fields = decompose(psi, dopt);
                       integrator.push(velocity_field(fields, s.spin, mask));
                       tracker.keep(r, std::move(fields));
                       if (k == plan.outputs) final_psi = psi;
                       ++k;
                       return true;
                     });
    tracker.finish(r, s.potential);
    const TrajectoryEnsemble bohm = integrator.take();
    finish_bohm(r, bohm);
    const std::size_t last = bohm.time_count() - 1;

    if (classical) {
      for (std::size_t p = 0; p < n_compared; ++p) {
        const auto at = bohm.absorbed_at(p);
        const std::size_t end = at ? *at : bohm.time_count();
        double dev = 0;
        for (std::size_t t = 0; t < end; ++t) {
          dev = std::max(dev, distance(bohm.position(t, p), classical->position(t, p), dim));
        }
        r.trajectory_deviation.push_back(dev);
      }
      if (!r.trajectory_deviation.empty()) {
        r.median_deviation = median(r.trajectory_deviation);
        r.max_deviation = *std::max_element(r.trajectory_deviation.begin(), r.trajectory_deviation.end());
      }
    }

    RealField rho_final(plan.grid, FieldUnits::density);
    for (std::size_t f = 0; f < plan.grid.size(); ++f) rho_final.values[f] = std::norm(final_psi->values[f]);

    if (classical_rho) {
      const Grid& cg = *classical_grid;
      std::vector<Point> nodes(cg.size());
      for (std::size_t f = 0; f < cg.size(); ++f) nodes[f] = cg.node(f);
      const auto rho_q = resample_spectral(plan.grid, rho_final.values, nodes);
      double l1 = 0, rmax = 0;
      for (double v : classical_rho->values) {
        if (std::isfinite(v)) rmax = std::max(rmax, v);
      }
      std::vector<double> diff;
      const auto& S_cl = result.classical_action->S.values;
      const auto& fields = *tracker.last;
      for (std::size_t f = 0; f < cg.size(); ++f) {
        const double rc = classical_rho->values[f];
        if (!std::isfinite(rc)) continue;
        l1 += std::abs(rho_q[f] - rc) * cg.cell_volume();
        if (rc < kResidualWindow * rmax) continue;
        double sq;
        if (interpolate_multilinear(plan.grid, fields.action.values, fields.valid, nodes[f], sq)) {
          diff.push_back(sq - S_cl[f]);
        }
      }
      r.density_l1 = l1;
      r.action_distance = minimax_spread(diff);
    }

    if (n_bohm >= kEquivarianceMinParticles) {
      const auto live = live_positions(bohm, last);
      if (!live.empty()) r.equivariance_l1 = histogram_l1(live, rho_final, equivariance_bins(dim));
    }

    if (s.potential.kind() == PotentialKind::double_slit) {
      r.double_slit = double_slit_metrics(bohm, s.potential.geometry(), s.seed);
    }

    RungOutput out{bohm.head(s.trajectory_export), {}};
    if (s.dump_fields) out.final_fields = std::move(tracker.last);
    result.rungs[i] = std::move(out);
    rep.rungs[i] = std::move(r);
    log_line(opt, "rung " + rung_label(plan) + ": done");
  });

  const auto order = by_decreasing_hbar(rep.rungs);
  if (classical) {
    add_slope(rep, "median_deviation", order, [](const RungReport& r) { return r.median_deviation; });
    std::size_t decreasing = 0;
    for (std::size_t p = 0; p < n_compared; ++p) {
      bool ok = true;
      for (std::size_t j = 1; j < order.size(); ++j) {
        ok = ok && rep.rungs[order[j]].trajectory_deviation[p] < rep.rungs[order[j - 1]].trajectory_deviation[p];
      }
      decreasing += ok ? 1 : 0;
    }
    if (n_compared > 0 && order.size() > 1) {
      rep.deviation_decreasing_fraction = static_cast<double>(decreasing) / static_cast<double>(n_compared);
      const double first = *rep.rungs[order.front()].median_deviation;
      const double finest = *rep.rungs[order.back()].median_deviation;
      rep.median_deviation_ratio = first > 0 ? finest / first : kNaN;
    }
  }
  if (classical_rho) {
    add_slope(rep, "density_l1", order, [](const RungReport& r) { return r.density_l1; });
    add_slope(rep, "action_distance", order, [](const RungReport& r) { return r.action_distance; });
    bool dec = order.size() > 1;
    for (std::size_t j = 1; j < order.size(); ++j) {
      dec = dec && *rep.rungs[order[j]].density_l1 < *rep.rungs[order[j - 1]].density_l1;
    }
    rep.density_l1_decreasing = dec;
  }
  return result;
}

SweepResult run_determinist_sweep(const Scenario& s, const SweepOptions& opt) {
  if (s.kind != ScenarioKind::determinist) throw InvalidArgument("scenario is not determinist");
  if (s.potential.kind() != PotentialKind::harmonic) {
    throw UnsupportedPotential("determinist sweeps need the harmonic oscillator");
  }
  const auto plans = plan_rungs(s);
  const std::size_t dim = s.dim;
  const double m = s.potential.mass();
  const double w = s.potential.omega();
  const double T = s.t_final;
  const auto& battery = weak_battery();

  SweepResult result;
  result.report = report_header(s);
  auto& rep = result.report;
  rep.rungs.resize(plans.size());
  result.rungs.resize(plans.size(), RungOutput{TrajectoryEnsemble(dim, TrajectoryKind::bohm, {0.0}, 0), {}});
  const std::size_t n_bohm = std::max(s.particles, s.equivariance_particles);

  run_indexed(plans.size(), opt.jobs, [&](std::size_t i) {
    const RungPlan& plan = plans[i];
    const Grid& grid = plan.grid;
    log_line(opt, "rung " + rung_label(plan) + ": evolving");
    RungReport r = base_report(plan);
    DeterministMetrics dm;
    dm.q_expected = 0.5 * static_cast<double>(dim) * plan.hbar * w;
    dm.weak_errors.assign(battery.size(), 0.0);
    const CoherentState cs(dim, w, m, plan.hbar, s.coherent_x0, s.coherent_v0);
    const auto cfg = propagator_config(s, plan);
    const RealField* mask = cfg.boundary_mask ? &*cfg.boundary_mask : nullptr;
    const auto times = output_times(plan);
    const TrajectoryKind kind = s.spin ? TrajectoryKind::bohm_spin : TrajectoryKind::bohm;
    std::vector<Point> starts;
    if (n_bohm > 0) starts = sample_initial_positions(cs.density_field(grid, 0.0), n_bohm, s.seed, s.rho_floor_relative);
    EnsembleIntegrator integrator(starts, dim, times, kind, s.bohm_substeps);
    const std::size_t mid = plan.outputs / 2;
    SnapshotTracker tracker;
    tracker.has_mask = mask != nullptr;
    DecomposeOptions dopt;
    dopt.rho_floor_relative = s.rho_floor_relative;
    dopt.allow_disconnected = true;
    std::vector<Point> nodes(grid.size());
    for (std::size_t f = 0; f < grid.size(); ++f) nodes[f] = grid.node(f);
    double tracked = 0, tracked_prev_raw = 0;
    std::size_t k = 0;

    evolve_streaming(cs.wavefunction(grid, 0.0), s.potential, cfg, T, [&](const WaveField& psi, const Observation& obs) {
      const double t = psi.time;
      tracker.observe(r, obs, k);
      auto fields = decompose(psi, dopt);

      double dlinf = 0;
      std::vector<double> adiff;
      double qerr = 0;
      for (std::size_t f = 0; f < grid.size(); ++f) {
        dlinf = std::max(dlinf, std::abs(fields.rho.values[f] - cs.density(nodes[f], t)));
        if (!fields.valid[f]) continue;
        adiff.push_back(fields.action.values[f] - cs.action(nodes[f], t));
        const double q = cs.quantum_potential(nodes[f], t);
        qerr = std::max(qerr, std::abs(fields.qpotential.values[f] - q) / std::max(std::abs(q), plan.hbar * w));
      }
      const double adist = minimax_spread(adiff);
      dm.density_linf = std::max(dm.density_linf, dlinf);
      dm.action_distance = std::max(dm.action_distance, adist);
      dm.density_linf_final = dlinf;
      dm.action_distance_final = adist;
      dm.q_field_rel_error = std::max(dm.q_field_rel_error, qerr);

      const Point xi = cs.xi(t);
      const double q_xi = quantum_potential_at(fields, xi);
      dm.q_times.push_back(t);
      dm.q_at_xi.push_back(q_xi);
      dm.q_at_xi_rel_error = std::max(dm.q_at_xi_rel_error, std::abs(q_xi - dm.q_expected) / dm.q_expected);

      for (std::size_t b = 0; b < battery.size(); ++b) {
        double integral = 0;
        for (std::size_t f = 0; f < grid.size(); ++f) integral += battery[b].f(nodes[f], dim) * fields.rho.values[f];
        integral *= grid.cell_volume();
        dm.weak_errors[b] = std::max(dm.weak_errors[b], std::abs(integral - battery[b].f(xi, dim)));
      }

      // S - S_limit near xi: the phase of psi exp(-i S_limit / hbar) at the
      // density peak, unwrapped along the outputs, plus its spatial
      // variation over the window.
      const LimitFields lim = cs.limit_fields(t);
      auto relative_phase = [&](std::size_t f) {
        return std::arg(psi.values[f] * std::polar(1.0, -lim.action(nodes[f]) / plan.hbar));
      };
      const double raw = relative_phase(fields.seed);
      tracked = k == 0 ? raw : tracked + wrap_phase(raw - tracked_prev_raw);
      tracked_prev_raw = raw;
      const double expected_gap = -dm.q_expected * t;
      for (std::size_t f = 0; f < grid.size(); ++f) {
        if (!fields.valid[f] || distance(nodes[f], xi, dim) > s.action_window) continue;
        const double gap = plan.hbar * (tracked + wrap_phase(relative_phase(f) - raw));
        dm.action_gap_max = std::max(dm.action_gap_max, std::abs(gap));
        dm.action_gap_deviation = std::max(dm.action_gap_deviation, std::abs(gap - expected_gap));
      }

      if (n_bohm > 0) {
        integrator.push(velocity_field(fields, s.spin, mask));
        if (s.equivariance_particles > 0 && (k == 0 || k == mid || k == plan.outputs)) {
          const auto live = live_positions(integrator.ensemble(), k);
          dm.equivariance_times.push_back(t);
          dm.equivariance_l1.push_back(live.empty() ? kNaN
                                                    : histogram_l1(live, fields.rho, equivariance_bins(dim)));
        }
      }
      tracker.keep(r, std::move(fields));
      ++k;
      return true;
    });
    tracker.finish(r, s.potential);
    TrajectoryEnsemble bohm = n_bohm > 0 ? integrator.take() : TrajectoryEnsemble(dim, TrajectoryKind::bohm, times, 0);
    finish_bohm(r, bohm);
    r.determinist = std::move(dm);
    RungOutput out{bohm.head(s.trajectory_export), {}};
    if (s.dump_fields) out.final_fields = std::move(tracker.last);
    result.rungs[i] = std::move(out);
    rep.rungs[i] = std::move(r);
    log_line(opt, "rung " + rung_label(plan) + ": done");
  });

  const auto order = by_decreasing_hbar(rep.rungs);
  for (std::size_t b = 0; b < battery.size(); ++b) {
    add_slope(rep, "weak_" + battery[b].name, order,
              [b](const RungReport& r) { return std::optional<double>(r.determinist->weak_errors[b]); });
  }
  add_slope(rep, "action_gap_max", order,
            [](const RungReport& r) { return std::optional<double>(r.determinist->action_gap_max); });
  add_slope(rep, "density_linf", order,
            [](const RungReport& r) { return std::optional<double>(r.determinist->density_linf); });
  return result;
}

SweepResult run_sweep(const Scenario& s, const SweepOptions& opt) {
  return s.kind == ScenarioKind::statistical ? run_statistical_sweep(s, opt) : run_determinist_sweep(s, opt);
}

}  // namespace semiclassical
