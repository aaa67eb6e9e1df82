#include "semiclassical/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "semiclassical/errors.hpp"
#include "semiclassical/schrodinger.hpp"

namespace semiclassical {
namespace {

const std::vector<std::pair<std::string, std::vector<std::string>>>& schema() {
  static const std::vector<std::pair<std::string, std::vector<std::string>>> s = {
      {"scenario", {"name", "kind", "units", "seed"}},
      {"grid", {"dimension", "extent", "points", "min_points", "max_points"}},
      {"potential",
       {"kind", "mass", "omega", "force", "offset", "barrier_position", "barrier_thickness", "slit_separation",
        "slit_width", "height", "edge_width"}},
      {"initial", {"center", "width", "velocity", "chirp", "x0", "v0", "wavenumber"}},
      {"hbar", {"base", "divisors"}},
      {"run",
       {"t_final", "outputs", "dt", "max_kinetic_phase", "min_steps_per_output", "particles",
        "equivariance_particles", "bohm_substeps", "rho_floor_relative", "absorber_width", "spin", "scan_points",
        "classical_points", "action_window", "trajectory_export"}},
      {"output", {"fields"}},
  };
  return s;
}

std::vector<std::string> all_keys() {
  std::vector<std::string> out;
  for (const auto& [sec, keys] : schema()) {
    for (const auto& k : keys) out.push_back(sec + "." + k);
  }
  return out;
}

bool known_section(const std::string& s) {
  return std::any_of(schema().begin(), schema().end(), [&](const auto& e) { return e.first == s; });
}

bool known_key(const std::string& full) {
  const auto keys = all_keys();
  return std::find(keys.begin(), keys.end(), full) != keys.end();
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::string nearest_section(const std::string& name) {
  std::string best;
  std::size_t best_d = std::numeric_limits<std::size_t>::max();
  for (const auto& entry : schema()) {
    const std::size_t d = edit_distance(name, entry.first);
    if (d < best_d) {
      best_d = d;
      best = entry.first;
    }
  }
  return best;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Entry {
  std::string value;
  int line = 0;
};

using Table = std::map<std::string, Entry>;

class Reader {
 public:
  explicit Reader(const Table& t) : table_(t) {}

  bool has(const std::string& key) const { return table_.count(key) > 0; }

  const Entry& entry(const std::string& key) const {
    auto it = table_.find(key);
    if (it == table_.end()) throw ConfigError(key, "required key is missing");
    return it->second;
  }

  std::string text(const std::string& key) const { return entry(key).value; }
  std::string text(const std::string& key, const std::string& fallback) const {
    return has(key) ? text(key) : fallback;
  }

  double number(const std::string& key) const { return parse_double(key, entry(key)); }
  double number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

  std::uint64_t unsigned_integer(const std::string& key) const {
    const Entry& e = entry(key);
    std::uint64_t v = 0;
    const char* first = e.value.data();
    const char* last = first + e.value.size();
    auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || p != last) throw ConfigError(key, "expected a nonnegative integer, got '" + e.value + "'", e.line);
    return v;
  }
  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) const {
    return has(key) ? unsigned_integer(key) : fallback;
  }

  std::vector<double> numbers(const std::string& key) const {
    const Entry& e = entry(key);
    std::vector<double> out;
    std::stringstream ss(e.value);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(key, Entry{trim(item), e.line}));
    if (out.empty()) throw ConfigError(key, "expected a comma-separated list of numbers", e.line);
    return out;
  }

  int line(const std::string& key) const { return has(key) ? entry(key).line : 0; }

 private:
  static double parse_double(const std::string& key, const Entry& e) {
    double v = 0;
    const char* first = e.value.data();
    const char* last = first + e.value.size();
    auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || p != last || !std::isfinite(v)) {
      throw ConfigError(key, "expected a number, got '" + e.value + "'", e.line);
    }
    return v;
  }

  const Table& table_;
};

Table parse_table(const std::string& text) {
  Table table;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("", "malformed section header '" + s + "'", line);
      section = trim(s.substr(1, s.size() - 2));
      if (!known_section(section)) {
        throw ConfigError(section, "unknown section; did you mean '" + nearest_section(section) + "'?", line);
      }
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("", "expected 'key = value', got '" + s + "'", line);
    if (section.empty()) throw ConfigError(trim(s.substr(0, eq)), "key outside of any section", line);
    const std::string key = section + "." + trim(s.substr(0, eq));
    if (!known_key(key)) throw ConfigError(key, "unknown key; did you mean '" + nearest_key(key) + "'?", line);
    if (table.count(key)) throw ConfigError(key, "duplicate key", line);
    table[key] = Entry{trim(s.substr(eq + 1)), line};
  }
  return table;
}

std::string resolve_override_key(const std::string& key) {
  if (known_key(key)) return key;
  for (const auto& [sec, keys] : schema()) {
    const std::string prefix = sec + "_";
    if (key.rfind(prefix, 0) == 0 && known_key(sec + "." + key.substr(prefix.size()))) {
      return sec + "." + key.substr(prefix.size());
    }
  }
  std::vector<std::string> matches;
  for (const auto& full : all_keys()) {
    if (full.substr(full.find('.') + 1) == key) matches.push_back(full);
  }
  if (matches.size() == 1) return matches.front();
  if (matches.size() > 1) throw ConfigError(key, "ambiguous override; qualify it as section.key");
  throw ConfigError(key, "unknown key; did you mean '" + nearest_key(key) + "'?");
}

Point vector_value(const Reader& r, const std::string& key, std::size_t dim, bool broadcast, Point fallback) {
  if (!r.has(key)) return fallback;
  const auto v = r.numbers(key);
  Point out{0.0, 0.0};
  if (v.size() == dim) {
    for (std::size_t a = 0; a < dim; ++a) out[a] = v[a];
  } else if (broadcast && v.size() == 1) {
    for (std::size_t a = 0; a < dim; ++a) out[a] = v[0];
  } else {
    throw ConfigError(key, "expected " + std::to_string(dim) + " component(s)", r.line(key));
  }
  return out;
}

void require(bool ok, const std::string& key, const std::string& message, const Reader& r) {
  if (!ok) throw ConfigError(key, message, r.line(key));
}

Scenario interpret(const Table& table) {
  const Reader r(table);
  Scenario s;
  s.name = r.text("scenario.name");
  require(!s.name.empty() && s.name.find_first_of("/\\ ") == std::string::npos, "scenario.name",
          "name must be a non-empty word without slashes or spaces", r);
  const std::string kind = r.text("scenario.kind");
  if (kind == "statistical") s.kind = ScenarioKind::statistical;
  else if (kind == "determinist") s.kind = ScenarioKind::determinist;
  else throw ConfigError("scenario.kind", "expected 'statistical' or 'determinist', got '" + kind + "'", r.line("scenario.kind"));
  s.units = r.text("scenario.units", "natural");
  if (s.units == "si") {
    throw ConfigError("scenario.units", "SI scenarios are not supported; rescale to natural or atomic units",
                      r.line("scenario.units"));
  }
  require(s.units == "natural" || s.units == "atomic", "scenario.units", "expected 'natural' or 'atomic'", r);
  s.seed = r.unsigned_integer("scenario.seed");

  const auto dim = r.unsigned_integer("grid.dimension");
  require(dim == 1 || dim == 2, "grid.dimension", "dimension must be 1 or 2", r);
  s.dim = dim;
  s.extent = vector_value(r, "grid.extent", s.dim, true, {0.0, 0.0});
  if (!r.has("grid.extent")) throw ConfigError("grid.extent", "required key is missing");
  for (std::size_t a = 0; a < s.dim; ++a) require(s.extent[a] > 0, "grid.extent", "extent must be positive", r);
  if (r.has("grid.points") && r.text("grid.points") != "auto") {
    const Point p = vector_value(r, "grid.points", s.dim, true, {0.0, 0.0});
    for (std::size_t a = 0; a < s.dim; ++a) {
      require(p[a] >= 8 && std::floor(p[a]) == p[a] && static_cast<std::size_t>(p[a]) % 2 == 0, "grid.points",
              "point counts must be even integers >= 8", r);
      s.points[a] = static_cast<std::size_t>(p[a]);
    }
  }
  s.min_points = r.unsigned_integer("grid.min_points", s.min_points);
  s.max_points = r.unsigned_integer("grid.max_points", s.max_points);
  require(s.max_points >= 8, "grid.max_points", "max_points must be >= 8", r);

  const std::string pk = r.text("potential.kind");
  const double mass = r.number("potential.mass");
  require(mass > 0, "potential.mass", "mass must be positive", r);
  const double offset = r.number("potential.offset", 0.0);
  if (pk == "free") {
    s.potential = PotentialSpec::free(mass, offset);
  } else if (pk == "linear") {
    require(r.has("potential.force"), "potential.force", "linear potential needs a force vector", r);
    s.potential = PotentialSpec::linear(mass, vector_value(r, "potential.force", s.dim, false, {}), offset);
  } else if (pk == "harmonic") {
    const double omega = r.number("potential.omega");
    require(omega > 0, "potential.omega", "harmonic potential requires omega > 0", r);
    s.potential = PotentialSpec::harmonic(mass, omega, offset);
  } else if (pk == "double_slit") {
    require(s.dim == 2, "potential.kind", "the double slit needs grid.dimension = 2", r);
    DoubleSlitGeometry g;
    g.barrier_position = r.number("potential.barrier_position", g.barrier_position);
    g.barrier_thickness = r.number("potential.barrier_thickness", g.barrier_thickness);
    g.slit_separation = r.number("potential.slit_separation", g.slit_separation);
    g.slit_width = r.number("potential.slit_width", g.slit_width);
    g.height = r.number("potential.height", g.height);
    g.edge_width = r.number("potential.edge_width", g.edge_width);
    try {
      s.potential = PotentialSpec::double_slit(mass, g);
    } catch (const InvalidArgument& e) {
      throw ConfigError("potential", e.what(), r.line("potential.kind"));
    }
  } else {
    throw ConfigError("potential.kind", "expected free, linear, harmonic or double_slit, got '" + pk + "'",
                      r.line("potential.kind"));
  }

  if (s.kind == ScenarioKind::statistical) {
    require(!r.has("initial.wavenumber"), "initial.wavenumber",
            "a wavenumber makes S0 = hbar k . x depend on hbar; statistical scenarios need hbar-independent "
            "initial data (give initial.velocity instead)",
            r);
    require(!r.has("initial.x0") && !r.has("initial.v0"), r.has("initial.x0") ? "initial.x0" : "initial.v0",
            "x0/v0 describe a coherent state; use center/velocity in statistical scenarios", r);
    require(r.has("initial.center"), "initial.center", "required key is missing", r);
    require(r.has("initial.width"), "initial.width", "required key is missing", r);
    s.packet.center = vector_value(r, "initial.center", s.dim, false, {});
    s.packet.width = vector_value(r, "initial.width", s.dim, true, {});
    if (s.dim == 1) s.packet.width[1] = 1.0;
    for (std::size_t a = 0; a < s.dim; ++a) require(s.packet.width[a] > 0, "initial.width", "width must be positive", r);
    s.packet.velocity = vector_value(r, "initial.velocity", s.dim, false, {0.0, 0.0});
    s.packet.chirp = r.number("initial.chirp", 0.0);
  } else {
    require(s.potential.kind() == PotentialKind::harmonic, "potential.kind",
            "determinist scenarios use the coherent state of the harmonic oscillator", r);
    for (const char* k : {"initial.center", "initial.width", "initial.velocity", "initial.chirp", "initial.wavenumber"}) {
      require(!r.has(k), k, "not used by determinist scenarios (the coherent state is fixed by x0, v0 and hbar)", r);
    }
    require(r.has("initial.x0"), "initial.x0", "required key is missing", r);
    s.coherent_x0 = vector_value(r, "initial.x0", s.dim, false, {});
    s.coherent_v0 = vector_value(r, "initial.v0", s.dim, false, {0.0, 0.0});
  }

  s.hbar_base = r.number("hbar.base");
  require(s.hbar_base > 0, "hbar.base", "hbar must be positive", r);
  if (s.units == "atomic") require(s.hbar_base == 1.0, "hbar.base", "hbar = 1 in atomic units", r);
  if (r.has("hbar.divisors")) s.hbar_divisors = r.numbers("hbar.divisors");
  for (double d : s.hbar_divisors) require(d > 0, "hbar.divisors", "divisors must be positive", r);
  {
    std::set<double> seen(s.hbar_divisors.begin(), s.hbar_divisors.end());
    require(seen.size() == s.hbar_divisors.size(), "hbar.divisors", "divisors must be distinct", r);
  }

  s.t_final = r.number("run.t_final");
  require(s.t_final > 0, "run.t_final", "t_final must be positive", r);
  s.outputs = r.unsigned_integer("run.outputs", s.outputs);
  require(s.outputs >= 1, "run.outputs", "outputs must be >= 1", r);
  if (r.has("run.dt") && r.text("run.dt") != "auto") {
    s.dt = r.number("run.dt");
    require(s.dt > 0, "run.dt", "dt must be positive", r);
  }
  s.max_kinetic_phase = r.number("run.max_kinetic_phase", s.max_kinetic_phase);
  require(s.max_kinetic_phase > 0 && s.max_kinetic_phase < std::numbers::pi, "run.max_kinetic_phase",
          "max_kinetic_phase must lie in (0, pi)", r);
  s.min_steps_per_output = r.unsigned_integer("run.min_steps_per_output", s.min_steps_per_output);
  require(s.min_steps_per_output >= 1, "run.min_steps_per_output", "must be >= 1", r);
  s.particles = r.unsigned_integer("run.particles", s.particles);
  s.equivariance_particles = r.unsigned_integer("run.equivariance_particles", s.equivariance_particles);
  s.bohm_substeps = r.unsigned_integer("run.bohm_substeps", s.bohm_substeps);
  require(s.bohm_substeps >= 1, "run.bohm_substeps", "must be >= 1", r);
  s.rho_floor_relative = r.number("run.rho_floor_relative", s.rho_floor_relative);
  require(s.rho_floor_relative > 0 && s.rho_floor_relative < 1, "run.rho_floor_relative", "must lie in (0, 1)", r);
  s.absorber_width = r.number("run.absorber_width", 0.0);
  require(s.absorber_width >= 0, "run.absorber_width", "must be >= 0", r);
  const std::string spin = r.text("run.spin", "off");
  if (spin == "+z") s.spin = SpinAxis{0.0, 0.0, 1.0};
  else if (spin == "-z") s.spin = SpinAxis{0.0, 0.0, -1.0};
  else require(spin == "off", "run.spin", "expected off, +z or -z", r);
  if (s.spin) require(s.dim == 2, "run.spin", "the spin term needs grid.dimension = 2", r);
  s.scan_points = r.unsigned_integer("run.scan_points", s.scan_points);
  require(s.scan_points >= 3, "run.scan_points", "must be >= 3", r);
  s.classical_points = r.unsigned_integer("run.classical_points", s.classical_points);
  require(s.classical_points >= 8 && s.classical_points % 2 == 0, "run.classical_points", "must be even and >= 8", r);
  s.action_window = r.number("run.action_window", s.action_window);
  require(s.action_window > 0, "run.action_window", "must be positive", r);
  s.trajectory_export = r.unsigned_integer("run.trajectory_export", s.trajectory_export);
  if (s.kind == ScenarioKind::determinist && s.equivariance_particles > 0) {
    require(s.outputs % 2 == 0, "run.outputs", "must be even so that T/2 is an output time", r);
  }

  const std::string fields = r.text("output.fields", "final");
  require(fields == "final" || fields == "none", "output.fields", "expected 'final' or 'none'", r);
  s.dump_fields = fields == "final";
  return s;
}

std::string fmt(double v) {
  std::array<char, 32> buf{};
  auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), p);
}

std::string fmt_point(const Point& p, std::size_t dim) {
  std::string s = fmt(p[0]);
  if (dim == 2) s += "," + fmt(p[1]);
  return s;
}

}  // namespace

const char* to_string(ScenarioKind kind) noexcept {
  return kind == ScenarioKind::statistical ? "statistical" : "determinist";
}

double PacketSpec::density(const Point& x, std::size_t dim) const {
  double e = 0, norm = 1;
  for (std::size_t a = 0; a < dim; ++a) {
    const double d = (x[a] - center[a]) / width[a];
    e += d * d;
    norm *= std::sqrt(2.0 * std::numbers::pi) * width[a];
  }
  return std::exp(-0.5 * e) / norm;
}

double PacketSpec::action(const Point& x, double mass) const {
  const double d0 = x[0] - center[0], d1 = x[1] - center[1];
  return mass * (velocity[0] * x[0] + velocity[1] * x[1]) + 0.5 * mass * chirp * (d0 * d0 + d1 * d1);
}

Point PacketSpec::initial_velocity(const Point& x) const {
  return {velocity[0] + chirp * (x[0] - center[0]), velocity[1] + chirp * (x[1] - center[1])};
}

std::string Scenario::echo() const {
  std::ostringstream os;
  os << "scenario.name = " << name << "\n";
  os << "scenario.kind = " << to_string(kind) << "\n";
  os << "scenario.units = " << units << "\n";
  os << "scenario.seed = " << seed << "\n";
  os << "grid.dimension = " << dim << "\n";
  os << "grid.extent = " << fmt_point(extent, dim) << "\n";
  os << "grid.points = ";
  if (points[0] == 0) os << "auto";
  else os << points[0] << (dim == 2 ? "," + std::to_string(points[1]) : "");
  os << "\n";
  os << "grid.min_points = " << min_points << "\n";
  os << "grid.max_points = " << max_points << "\n";
  os << "potential = " << potential.describe() << "\n";
  if (kind == ScenarioKind::statistical) {
    os << "initial.center = " << fmt_point(packet.center, dim) << "\n";
    os << "initial.width = " << fmt_point(packet.width, dim) << "\n";
    os << "initial.velocity = " << fmt_point(packet.velocity, dim) << "\n";
    os << "initial.chirp = " << fmt(packet.chirp) << "\n";
  } else {
    os << "initial.x0 = " << fmt_point(coherent_x0, dim) << "\n";
    os << "initial.v0 = " << fmt_point(coherent_v0, dim) << "\n";
  }
  os << "hbar.base = " << fmt(hbar_base) << "\n";
  os << "hbar.divisors = ";
  for (std::size_t i = 0; i < hbar_divisors.size(); ++i) os << (i ? "," : "") << fmt(hbar_divisors[i]);
  os << "\n";
  os << "run.t_final = " << fmt(t_final) << "\n";
  os << "run.outputs = " << outputs << "\n";
  os << "run.dt = " << (dt > 0 ? fmt(dt) : "auto") << "\n";
  os << "run.max_kinetic_phase = " << fmt(max_kinetic_phase) << "\n";
  os << "run.min_steps_per_output = " << min_steps_per_output << "\n";
  os << "run.particles = " << particles << "\n";
  os << "run.equivariance_particles = " << equivariance_particles << "\n";
  os << "run.bohm_substeps = " << bohm_substeps << "\n";
  os << "run.rho_floor_relative = " << fmt(rho_floor_relative) << "\n";
  os << "run.absorber_width = " << fmt(absorber_width) << "\n";
  os << "run.spin = " << (spin ? ((*spin)[2] > 0 ? "+z" : "-z") : "off") << "\n";
  os << "run.scan_points = " << scan_points << "\n";
  os << "run.classical_points = " << classical_points << "\n";
  os << "run.action_window = " << fmt(action_window) << "\n";
  os << "run.trajectory_export = " << trajectory_export << "\n";
  os << "output.fields = " << (dump_fields ? "final" : "none") << "\n";
  return os.str();
}

std::string nearest_key(const std::string& key) {
  std::string best;
  std::size_t best_d = std::numeric_limits<std::size_t>::max();
  for (const auto& full : all_keys()) {
    const std::string bare = full.substr(full.find('.') + 1);
    const std::size_t d = std::min(edit_distance(key, full), edit_distance(key, bare));
    if (d < best_d) {
      best_d = d;
      best = full;
    }
  }
  return best;
}

Scenario parse_scenario(const std::string& text, const std::vector<Override>& overrides) {
  Table table = parse_table(text);
  for (const auto& [k, v] : overrides) {
    const std::string key = resolve_override_key(trim(k));
    table[key] = Entry{trim(v), 0};
  }
  return interpret(table);
}

Scenario load_scenario(const std::string& path, const std::vector<Override>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read scenario file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), overrides);
}

namespace {

double estimate_v_max(const Scenario& s, double hbar) {
  const double m = s.potential.mass();
  if (s.kind == ScenarioKind::determinist) {
    const double w = s.potential.omega();
    double v2 = 0;
    for (std::size_t a = 0; a < s.dim; ++a) v2 += s.coherent_v0[a] * s.coherent_v0[a] + w * w * s.coherent_x0[a] * s.coherent_x0[a];
    return std::sqrt(v2) + 3.0 * std::sqrt(hbar * w / (2.0 * m));
  }
  double speed = 0, reach = 0, wmin = std::numeric_limits<double>::infinity(), half = 0;
  for (std::size_t a = 0; a < s.dim; ++a) {
    speed += s.packet.velocity[a] * s.packet.velocity[a];
    reach = std::max(reach, std::abs(s.packet.center[a]) + 4.0 * s.packet.width[a]);
    wmin = std::min(wmin, s.packet.width[a]);
    half = std::max(half, 0.5 * s.extent[a]);
  }
  double v = std::sqrt(speed) + std::abs(s.packet.chirp) * half + 3.0 * hbar / (m * wmin);
  if (s.potential.kind() == PotentialKind::harmonic) v += s.potential.omega() * reach;
  if (s.potential.kind() == PotentialKind::linear) {
    const Point& f = s.potential.force();
    v += std::sqrt(f[0] * f[0] + f[1] * f[1]) * s.t_final / m;
  }
  return v;
}

}  // namespace

std::vector<RungPlan> plan_rungs_unchecked(const Scenario& s) {
  std::vector<RungPlan> out;
  const double m = s.potential.mass();
  for (double divisor : s.hbar_divisors) {
    const double hbar = s.hbar_base / divisor;
    const double v_max = estimate_v_max(s, hbar);
    std::array<double, 2> ext{s.extent[0], s.extent[1]};
    std::array<std::size_t, 2> pts{8, 8};
    // Probe grid for the resolution rule (point counts do not matter).
    const Grid probe(s.dim, std::span<const double>(ext.data(), s.dim), std::span<const std::size_t>(pts.data(), s.dim));
    const auto check = check_resolution(probe, hbar, m, v_max);
    bool resolved = true;
    for (std::size_t a = 0; a < s.dim; ++a) {
      if (s.points[a] > 0) {
        pts[a] = s.points[a];
        resolved = resolved && pts[a] >= check.required_points[a];
      } else {
        pts[a] = fft_size_at_least(std::max(check.required_points[a], s.min_points));
        resolved = resolved && pts[a] <= s.max_points;
        pts[a] = std::min(pts[a], fft_size_at_least(s.max_points));
      }
    }
    Grid grid(s.dim, std::span<const double>(ext.data(), s.dim), std::span<const std::size_t>(pts.data(), s.dim));

    const double interval = s.t_final / static_cast<double>(s.outputs);
    std::size_t steps = s.min_steps_per_output;
    if (s.dt > 0) {
      const double r = interval / s.dt;
      steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(r)));
    } else if (!s.potential.spatially_uniform()) {
      const double dt_limit = s.max_kinetic_phase * 2.0 * m / (hbar * grid.max_k_squared());
      steps = std::max(steps, static_cast<std::size_t>(std::ceil(interval / dt_limit)));
    }
    const double dt = interval / static_cast<double>(steps);
    out.push_back(RungPlan{divisor, hbar, grid, v_max, check.wavelength, check.required_points, resolved, dt, steps,
                           s.outputs, kinetic_phase_per_step(grid, hbar, m, dt)});
  }
  return out;
}

std::vector<RungPlan> plan_rungs(const Scenario& s) {
  auto plans = plan_rungs_unchecked(s);
  for (const auto& p : plans) {
    if (!p.resolved) {
      std::ostringstream msg;
      msg << "hbar/" << p.divisor << " (hbar = " << p.hbar << ") needs at least ";
      for (std::size_t a = 0; a < p.required_points.size(); ++a) {
        msg << (a ? " x " : "") << fft_size_at_least(p.required_points[a]);
      }
      msg << " grid points (8 per de Broglie wavelength " << p.wavelength << " at v_max " << p.v_max << ")";
      if (s.points[0] == 0) msg << "; raise grid.max_points or shrink grid.extent";
      else msg << "; set grid.points accordingly";
      throw ResolutionError(msg.str());
    }
    if (s.dt > 0 && std::abs(p.dt - s.dt) > 1e-9 * s.dt) {
      throw ConfigError("run.dt", "t_final / outputs must be a multiple of dt");
    }
    if (!s.potential.spatially_uniform() && p.kinetic_phase >= std::numbers::pi) {
      std::ostringstream msg;
      msg << "hbar/" << p.divisor << ": kinetic phase per step " << p.kinetic_phase << " >= pi; reduce run.dt";
      throw ResolutionError(msg.str());
    }
  }
  return plans;
}

}  // namespace semiclassical
