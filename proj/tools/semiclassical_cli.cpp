// semiclassical run <scenario> --out DIR [--set key=value ...] [--jobs N] [--seed S]
// semiclassical validate <scenario> [--set key=value ...]
//
// Exit codes: 0 success, 1 usage, 2 configuration or resolution problem,
// 3 runtime failure.

#include <cstdio>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "semiclassical/errors.hpp"
#include "semiclassical/experiments.hpp"
#include "semiclassical/output.hpp"
#include "semiclassical/scenario.hpp"

namespace sc = semiclassical;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

std::vector<sc::Override> parse_overrides(const std::vector<std::string>& items) {
  std::vector<sc::Override> out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw sc::ConfigError(item, "override must look like key=value");
    out.emplace_back(item.substr(0, eq), item.substr(eq + 1));
  }
  return out;
}

std::string points_text(const std::vector<std::size_t>& p) {
  std::ostringstream os;
  for (std::size_t i = 0; i < p.size(); ++i) os << (i ? "x" : "") << p[i];
  return os.str();
}

void print_plan(const sc::Scenario& s, const std::vector<sc::RungPlan>& plans) {
  std::cout << "scenario " << s.name << " (" << sc::to_string(s.kind) << ", " << s.dim << "D, "
            << s.potential.describe() << ")\n";
  std::cout << std::left << std::setw(10) << "divisor" << std::setw(14) << "hbar" << std::setw(14) << "wavelength"
            << std::setw(14) << "required" << std::setw(14) << "grid" << std::setw(14) << "dt" << std::setw(10)
            << "steps" << "status\n";
  for (const auto& p : plans) {
    std::vector<std::size_t> grid;
    for (std::size_t a = 0; a < p.grid.dim(); ++a) grid.push_back(p.grid.points(a));
    std::cout << std::left << std::setw(10) << p.divisor << std::setw(14) << p.hbar << std::setw(14)
              << p.wavelength << std::setw(14) << points_text(p.required_points) << std::setw(14)
              << points_text(grid) << std::setw(14) << p.dt << std::setw(10) << p.steps_per_output * p.outputs
              << (p.resolved ? "ok" : "UNDER-RESOLVED") << "\n";
  }
}

int cmd_validate(const std::string& path, const std::vector<std::string>& sets) {
  const auto scenario = sc::load_scenario(path, parse_overrides(sets));
  print_plan(scenario, sc::plan_rungs_unchecked(scenario));
  sc::plan_rungs(scenario);
  std::cout << "valid\n";
  return 0;
}

int cmd_run(const std::string& path, const std::string& out, std::vector<std::string> sets, std::size_t jobs,
            const std::string& seed) {
  if (!seed.empty()) sets.push_back("scenario.seed=" + seed);
  const auto scenario = sc::load_scenario(path, parse_overrides(sets));
  sc::plan_rungs(scenario);
  const std::string started = sc::utc_timestamp();
  sc::SweepOptions opt;
  opt.jobs = jobs;
  opt.log = [](const std::string& line) { std::cerr << "[semiclassical] " << line << "\n"; };
  const auto result = sc::run_sweep(scenario, opt);
  const auto manifest = sc::write_run_directory(out, scenario, result, started, sc::utc_timestamp());
  std::cerr << "[semiclassical] wrote " << manifest.outputs.size() + 1 << " files to " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semiclassical limit laboratory: hbar sweeps of Schroedinger, Madelung and Bohm dynamics"};
  app.require_subcommand(1);
  app.set_version_flag("--version", sc::kToolVersion);

  std::string path, out, seed;
  std::vector<std::string> sets;
  std::size_t jobs = 1;

  auto* run = app.add_subcommand("run", "Run the scenario's hbar sweep and write a run directory");
  run->add_option("scenario", path, "Scenario file")->required();
  run->add_option("--out", out, "Run directory")->required();
  run->add_option("--set", sets, "Override, key=value (repeatable)");
  run->add_option("--jobs", jobs, "Maximum concurrent hbar rungs")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "Override the scenario seed");

  auto* validate = app.add_subcommand("validate", "Parse the scenario and check every rung's resolution");
  validate->add_option("scenario", path, "Scenario file")->required();
  validate->add_option("--set", sets, "Override, key=value (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and --version exit 0; every other parse failure is a usage error.
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  try {
    if (*run) return cmd_run(path, out, sets, jobs, seed);
    return cmd_validate(path, sets);
  } catch (const sc::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const sc::ResolutionError& e) {
    std::cerr << "resolution error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const sc::Error& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
