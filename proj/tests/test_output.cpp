#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "semiclassical/experiments.hpp"
#include "semiclassical/output.hpp"

using namespace semiclassical;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

const char* kScenario = R"([scenario]
name = output_probe
kind = statistical
seed = 12
[grid]
dimension = 1
extent = 24
[potential]
kind = free
mass = 1
[initial]
center = -1
width = 1
velocity = 1
[hbar]
base = 1
divisors = 1, 10
[run]
t_final = 0.5
outputs = 10
particles = 8
classical_points = 256
scan_points = 501
)";

}  // namespace

TEST_CASE("SHA-256 test vectors") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("format_double round-trips") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-50, 50);
  for (int i = 0; i < 1000; ++i) {
    const double v = std::exp(u(rng)) * (i % 2 ? -1 : 1);
    const std::string s = format_double(v);
    double back = 0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    CHECK(back == v);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("run directory layout") {
  const auto s = parse_scenario(kScenario);
  const auto result = run_sweep(s);
  const fs::path dir = fs::temp_directory_path() / "semiclassical_test_output";
  fs::remove_all(dir);
  const auto manifest = write_run_directory(dir.string(), s, result, "2026-01-01T00:00:00Z", "2026-01-01T00:00:01Z");

  for (const auto& rel : manifest.outputs) CHECK(fs::exists(dir / rel));
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK(manifest.outputs.front() == "scenario.echo");
  CHECK(slurp(dir / "scenario.echo") == s.echo());
  CHECK(manifest.scenario_hash == sha256_hex(s.echo()));

  CHECK(first_line(dir / "trajectories.csv") == "hbar_divisor,hbar,kind,particle,time,x,absorbed");
  CHECK(first_line(dir / "fields/hbar_1.csv") == "x,rho,action,qpotential");
  CHECK(first_line(dir / "fields/hbar_10.csv") == "x,rho,action,qpotential");
  CHECK(first_line(dir / "fields/classical.csv") == "x,action,rho,multivalued");

  // Two Bohm rungs plus the classical paths, 8 particles x 11 times each.
  std::ifstream traj(dir / "trajectories.csv");
  std::string line;
  std::size_t rows = 0, classical = 0;
  std::getline(traj, line);
  while (std::getline(traj, line)) {
    ++rows;
    if (line.rfind("0,0,classical,", 0) == 0) ++classical;
  }
  CHECK(rows == 3 * 8 * 11);
  CHECK(classical == 8 * 11);

  const auto metrics = nlohmann::json::parse(slurp(dir / "metrics.json"));
  CHECK(metrics["scenario"] == "output_probe");
  CHECK(metrics["rungs"].size() == 2);
  CHECK(metrics["rungs"][0]["hbar"] == 1.0);
  CHECK(metrics.contains("slopes"));
  CHECK(slurp(dir / "metrics.json") == metrics_json(result.report));

  const auto mj = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(mj["scenario_hash"] == manifest.scenario_hash);
  CHECK(mj["seed"] == 12);
  CHECK(mj["version"] == kToolVersion);
  CHECK(mj["started"] == "2026-01-01T00:00:00Z");
  CHECK(mj["outputs"].size() == manifest.outputs.size());
  fs::remove_all(dir);
}

TEST_CASE("UTC timestamps") {
  const auto t = utc_timestamp();
  CHECK(t.size() == 20);
  CHECK(t[10] == 'T');
  CHECK(t.back() == 'Z');
}
