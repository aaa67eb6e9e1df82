#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(SEMICLASSICAL_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_scenario(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / name;
  std::ofstream(p) << text;
  return p;
}

const std::string kSmall = R"([scenario]
name = cli_probe
kind = statistical
seed = 2
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
divisors = 1
[run]
t_final = 0.5
outputs = 5
particles = 5
classical_points = 256
scan_points = 501
)";

}  // namespace

TEST_CASE("validate accepts the shipped scenarios") {
  for (const char* name : {"free_packet", "coherent", "coherent_2d", "double_slit"}) {
    CHECK(run("validate " + std::string(SEMICLASSICAL_SOURCE_DIR) + "/scenarios/" + name + ".cfg") == 0);
  }
}

TEST_CASE("exit codes") {
  const auto good = write_scenario("cli_good.cfg", kSmall);
  const fs::path out = fs::temp_directory_path() / "cli_run";
  fs::remove_all(out);
  CHECK(run("run " + good.string() + " --out " + out.string()) == 0);
  CHECK(fs::exists(out / "manifest.json"));

  CHECK(run("run " + good.string() + " --out " + out.string() + " --set no_such_key=1") == 2);
  CHECK(run("validate " + good.string() + " --set grid.points=16 --set divisors=1000") == 2);
  const auto bad = write_scenario("cli_bad.cfg", kSmall + "bogus = 1\n");
  CHECK(run("validate " + bad.string()) == 2);
  CHECK(run("validate /nonexistent/scenario.cfg") == 2);

  // A statistical oscillator run ending on a caustic fails at run time.
  std::string osc = kSmall;
  osc.replace(osc.find("kind = free"), 11, "kind = harmonic\nomega = 1");
  osc.replace(osc.find("t_final = 0.5"), 13, "t_final = 3.141592653589793");
  const auto caustic = write_scenario("cli_caustic.cfg", osc);
  CHECK(run("run " + caustic.string() + " --out " + (out / "caustic").string()) == 3);

  CHECK(run("") == 1);
  CHECK(run("frobnicate") == 1);
  fs::remove_all(out);
}

TEST_CASE("overrides reach the run and the seed flag is honoured") {
  const auto good = write_scenario("cli_override.cfg", kSmall);
  const fs::path out = fs::temp_directory_path() / "cli_override";
  fs::remove_all(out);
  REQUIRE(run("run " + good.string() + " --out " + out.string() + " --set hbar_divisors=10,100 --seed 77") == 0);
  std::ifstream in(out / "metrics.json");
  const auto m = nlohmann::json::parse(in);
  REQUIRE(m["rungs"].size() == 2);
  CHECK(m["rungs"][0]["hbar_divisor"] == 10.0);
  CHECK(m["rungs"][1]["hbar_divisor"] == 100.0);
  CHECK(m["seed"] == 77);
  fs::remove_all(out);
}
