#include "semiclassical/output.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "semiclassical/errors.hpp"

namespace semiclassical {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 15]);
  }
  return out;
}

namespace {

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json number(const std::optional<double>& v) { return v ? number(*v) : json(nullptr); }

json numbers(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

json point(const Point& p, std::size_t dim) {
  json a = json::array();
  for (std::size_t d = 0; d < dim; ++d) a.push_back(number(p[d]));
  return a;
}

json slope_json(const SlopeFit& s) {
  json o;
  o["valid"] = s.valid;
  o["points"] = s.points;
  o["slope"] = s.valid ? number(s.slope) : json(nullptr);
  o["intercept"] = s.valid ? number(s.intercept) : json(nullptr);
  o["residual"] = s.valid ? number(s.residual) : json(nullptr);
  return o;
}

json rung_json(const RungReport& r, std::size_t dim) {
  json o;
  o["hbar_divisor"] = number(r.divisor);
  o["hbar"] = number(r.hbar);
  o["points"] = r.points;
  o["dt"] = number(r.dt);
  o["steps_per_output"] = r.steps_per_output;
  o["outputs"] = r.outputs;
  o["kinetic_phase"] = number(r.kinetic_phase);
  o["v_max"] = number(r.v_max);
  o["wavelength"] = number(r.wavelength);
  o["norm_drift"] = number(r.norm_drift);
  o["energy_drift"] = number(r.energy_drift);
  o["absorbed_probability"] = number(r.absorbed_probability);
  o["max_components"] = r.max_components;
  o["max_vortices"] = r.max_vortices;
  o["madelung_hj_residual"] = number(r.madelung_hj_residual);
  o["madelung_continuity_residual"] = number(r.madelung_continuity_residual);
  o["bohm_particles"] = r.bohm_particles;
  o["bohm_absorbed"] = r.bohm_absorbed;
  if (r.final_dispersion) {
    const auto& d = *r.final_dispersion;
    o["final_dispersion"] = {{"live", d.live},
                             {"mean_position", point(d.mean_position, dim)},
                             {"position_variance", point(d.position_variance, dim)},
                             {"mean_velocity", point(d.mean_velocity, dim)},
                             {"velocity_variance", point(d.velocity_variance, dim)}};
  }
  if (!r.trajectory_deviation.empty()) o["trajectory_deviation"] = numbers(r.trajectory_deviation);
  if (r.median_deviation) o["median_deviation"] = number(r.median_deviation);
  if (r.max_deviation) o["max_deviation"] = number(r.max_deviation);
  if (r.density_l1) o["density_l1"] = number(r.density_l1);
  if (r.action_distance) o["action_distance"] = number(r.action_distance);
  if (r.equivariance_l1) o["equivariance_l1"] = number(r.equivariance_l1);
  if (r.double_slit) {
    const auto& d = *r.double_slit;
    o["double_slit"] = {{"transmitted", d.transmitted},
                        {"channels", d.channels},
                        {"axis_crossings", d.axis_crossings},
                        {"mean_curvature", number(d.mean_curvature)},
                        {"exit_deviation", number(d.exit_deviation)}};
  }
  if (r.determinist) {
    const auto& d = *r.determinist;
    json w;
    const auto& battery = weak_battery();
    for (std::size_t b = 0; b < battery.size(); ++b) w[battery[b].name] = number(d.weak_errors[b]);
    o["determinist"] = {{"density_linf", number(d.density_linf)},
                        {"density_linf_final", number(d.density_linf_final)},
                        {"action_distance", number(d.action_distance)},
                        {"action_distance_final", number(d.action_distance_final)},
                        {"q_expected", number(d.q_expected)},
                        {"q_times", numbers(d.q_times)},
                        {"q_at_xi", numbers(d.q_at_xi)},
                        {"q_at_xi_rel_error", number(d.q_at_xi_rel_error)},
                        {"q_field_rel_error", number(d.q_field_rel_error)},
                        {"weak_errors", w},
                        {"action_gap_max", number(d.action_gap_max)},
                        {"action_gap_deviation", number(d.action_gap_deviation)},
                        {"equivariance_times", numbers(d.equivariance_times)},
                        {"equivariance_l1", numbers(d.equivariance_l1)}};
  }
  return o;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << text;
  os.flush();
  if (!os) throw Error("failed writing " + path.string());
}

std::string divisor_tag(double divisor) {
  std::string s = format_double(divisor);
  for (char& c : s) {
    if (c == '.') c = 'p';
  }
  return s;
}

// Every `step`-th node per axis so that at most max_points remain.
std::size_t stride_for(std::size_t n, std::size_t max_points) { return (n + max_points - 1) / max_points; }

std::string fields_csv(const MadelungFields& f) {
  const Grid& g = f.grid;
  std::ostringstream os;
  os << (g.dim() == 1 ? "x" : "x,y") << ",rho,action,qpotential\n";
  const std::size_t s0 = g.dim() == 2 ? stride_for(g.points(0), 256) : 1;
  const std::size_t s1 = g.dim() == 2 ? stride_for(g.points(1), 256) : 1;
  const std::size_t n1 = g.dim() == 2 ? g.points(1) : 1;
  for (std::size_t i = 0; i < g.points(0); i += s0) {
    for (std::size_t j = 0; j < n1; j += s1) {
      const std::size_t k = g.flat_index(i, j);
      const Point x = g.node(k);
      os << format_double(x[0]);
      if (g.dim() == 2) os << ',' << format_double(x[1]);
      os << ',' << format_double(f.rho.values[k]) << ',' << format_double(f.action.values[k]) << ','
         << format_double(f.qpotential.values[k]) << '\n';
    }
  }
  return os.str();
}

void append_trajectories(std::ostringstream& os, const TrajectoryEnsemble& ens, const std::string& divisor,
                         const std::string& hbar) {
  for (std::size_t p = 0; p < ens.particle_count(); ++p) {
    const auto at = ens.absorbed_at(p);
    for (std::size_t k = 0; k < ens.time_count(); ++k) {
      const Point x = ens.position(k, p);
      os << divisor << ',' << hbar << ',' << to_string(ens.kind()) << ',' << p << ','
         << format_double(ens.times()[k]) << ',' << format_double(x[0]);
      if (ens.dim() == 2) os << ',' << format_double(x[1]);
      os << ',' << ((at && *at <= k) ? 1 : 0) << '\n';
    }
  }
}

}  // namespace

std::string metrics_json(const ConvergenceReport& rep) {
  json o;
  o["scenario"] = rep.scenario;
  o["kind"] = to_string(rep.kind);
  o["dimension"] = rep.dim;
  o["seed"] = rep.seed;
  o["t_final"] = number(rep.t_final);
  o["potential"] = rep.potential;
  json rungs = json::array();
  for (const auto& r : rep.rungs) rungs.push_back(rung_json(r, rep.dim));
  o["rungs"] = rungs;
  if (rep.classical) {
    o["classical"] = {{"density_method", rep.classical->density_method},
                      {"hj_residual", number(rep.classical->hj_residual)},
                      {"multivalued_nodes", rep.classical->multivalued_nodes},
                      {"boundary_nodes", rep.classical->boundary_nodes}};
  }
  json slopes = json::object();
  for (const auto& [name, fit] : rep.slopes) slopes[name] = slope_json(fit);
  o["slopes"] = slopes;
  if (rep.deviation_decreasing_fraction) o["deviation_decreasing_fraction"] = number(rep.deviation_decreasing_fraction);
  if (rep.median_deviation_ratio) o["median_deviation_ratio"] = number(rep.median_deviation_ratio);
  if (rep.density_l1_decreasing) o["density_l1_decreasing"] = *rep.density_l1_decreasing;
  return o.dump(2) + "\n";
}

std::string manifest_json(const RunManifest& m) {
  json o;
  o["tool"] = "semiclassical";
  o["version"] = m.version;
  o["scenario_hash"] = m.scenario_hash;
  o["seed"] = m.seed;
  o["started"] = m.started;
  o["finished"] = m.finished;
  o["outputs"] = m.outputs;
  return o.dump(2) + "\n";
}

RunManifest write_run_directory(const std::string& dir, const Scenario& s, const SweepResult& result,
                                const std::string& started, const std::string& finished) {
  const fs::path root(dir);
  fs::create_directories(root / "fields");
  RunManifest manifest;
  manifest.seed = s.seed;
  manifest.started = started;
  manifest.finished = finished;
  const std::string echo = s.echo();
  manifest.scenario_hash = sha256_hex(echo);

  write_file(root / "scenario.echo", echo);
  manifest.outputs.push_back("scenario.echo");
  write_file(root / "metrics.json", metrics_json(result.report));
  manifest.outputs.push_back("metrics.json");

  std::ostringstream traj;
  traj << "hbar_divisor,hbar,kind,particle,time,x" << (s.dim == 2 ? ",y" : "") << ",absorbed\n";
  for (std::size_t i = 0; i < result.rungs.size(); ++i) {
    const auto& r = result.report.rungs[i];
    append_trajectories(traj, result.rungs[i].bohm, format_double(r.divisor), format_double(r.hbar));
  }
  if (result.classical) append_trajectories(traj, *result.classical, "0", "0");
  write_file(root / "trajectories.csv", traj.str());
  manifest.outputs.push_back("trajectories.csv");

  for (std::size_t i = 0; i < result.rungs.size(); ++i) {
    if (!result.rungs[i].final_fields) continue;
    const std::string name = "fields/hbar_" + divisor_tag(result.report.rungs[i].divisor) + ".csv";
    write_file(root / name, fields_csv(*result.rungs[i].final_fields));
    manifest.outputs.push_back(name);
  }
  if (s.dump_fields && result.classical_action && result.classical_density) {
    const auto& sol = *result.classical_action;
    std::ostringstream os;
    os << "x,action,rho,multivalued\n";
    for (std::size_t f = 0; f < sol.grid.size(); ++f) {
      os << format_double(sol.grid.node(f)[0]) << ',' << format_double(sol.S.values[f]) << ','
         << format_double(result.classical_density->values[f]) << ',' << int(sol.multivalued[f]) << '\n';
    }
    write_file(root / "fields/classical.csv", os.str());
    manifest.outputs.push_back("fields/classical.csv");
  }
  write_file(root / "manifest.json", manifest_json(manifest));
  return manifest;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace semiclassical
