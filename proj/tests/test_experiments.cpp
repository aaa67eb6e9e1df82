#include <cmath>
#include <numbers>
#include <string>

#include "doctest.h"
#include "oracles.hpp"
#include "semiclassical/coherent.hpp"
#include "semiclassical/errors.hpp"
#include "semiclassical/experiments.hpp"
#include "semiclassical/output.hpp"

using namespace semiclassical;

namespace {

const char* kFree = R"([scenario]
name = small_free
kind = statistical
seed = 3
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
divisors = 1, 10, 100
[run]
t_final = 1
outputs = 50
particles = 40
classical_points = 512
scan_points = 1001
)";

const char* kCoherent = R"([scenario]
name = small_coherent
kind = determinist
seed = 4
[grid]
dimension = 1
extent = 16
[potential]
kind = harmonic
mass = 1
omega = 1
[initial]
x0 = 1
v0 = 0.5
[hbar]
base = 1
divisors = 1, 10, 100
[run]
t_final = 1
outputs = 10
max_kinetic_phase = 2
particles = 20
equivariance_particles = 2000
)";

}  // namespace

TEST_CASE("statistical sweep: Bohm paths and densities approach the classical limit") {
  const auto s = parse_scenario(kFree);
  const auto r = run_sweep(s);
  const auto& rep = r.report;
  REQUIRE(rep.rungs.size() == 3);
  for (std::size_t i = 0; i + 1 < rep.rungs.size(); ++i) {
    CHECK(*rep.rungs[i + 1].median_deviation < *rep.rungs[i].median_deviation);
    CHECK(*rep.rungs[i + 1].density_l1 < *rep.rungs[i].density_l1);
  }
  for (const auto& rung : rep.rungs) {
    CHECK(rung.norm_drift < 1e-10);
    CHECK(rung.max_vortices == 0);
    CHECK(rung.trajectory_deviation.size() == 40);
    CHECK(rung.madelung_hj_residual < 1e-3);
  }
  CHECK(*rep.deviation_decreasing_fraction >= 0.95);
  CHECK(*rep.density_l1_decreasing);
  REQUIRE(rep.classical);
  CHECK(*rep.classical->hj_residual < 1e-6);
  bool found = false;
  for (const auto& [name, fit] : rep.slopes) {
    if (name != "density_l1") continue;
    found = true;
    CHECK(fit.slope > 1.5);
  }
  CHECK(found);
  REQUIRE(r.classical);
  CHECK(r.classical->particle_count() == 40);
}

TEST_CASE("the sweep does not depend on the number of threads") {
  const auto s = parse_scenario(kFree, {{"divisors", "1, 10"}});
  SweepOptions one, two;
  one.jobs = 1;
  two.jobs = 2;
  CHECK(metrics_json(run_sweep(s, one).report) == metrics_json(run_sweep(s, two).report));
}

TEST_CASE("determinist sweep against the coherent-state closed form") {
  const auto s = parse_scenario(kCoherent);
  const auto rep = run_sweep(s).report;
  REQUIRE(rep.rungs.size() == 3);
  const auto& battery = weak_battery();
  for (const auto& rung : rep.rungs) {
    REQUIRE(rung.determinist);
    const auto& d = *rung.determinist;
    // Tolerances cover the splitting error of the coarsest admissible dt.
    CHECK(d.q_expected == doctest::Approx(rung.hbar / 2));
    CHECK(d.q_at_xi_rel_error < 1e-4);
    CHECK(d.density_linf_final < 1e-5);
    CHECK(d.action_gap_deviation < 1e-5);
    REQUIRE(d.equivariance_l1.size() == 3);
    for (double l1 : d.equivariance_l1) CHECK(l1 < 0.1);

    // Weak errors against Simpson quadrature of the exact Gaussian.
    REQUIRE(d.weak_errors.size() == battery.size());
    const CoherentState cs(1, 1.0, 1.0, rung.hbar, Point{1.0, 0}, Point{0.5, 0});
    const double sig = cs.sigma_hbar();
    for (std::size_t b = 0; b < battery.size(); ++b) {
      double expected = 0;
      for (std::size_t k = 0; k <= s.outputs; ++k) {
        const double t = s.t_final * static_cast<double>(k) / static_cast<double>(s.outputs);
        const Point c = cs.xi(t);
        const double mean = oracle::simpson(
            [&](double x) { return battery[b].f(Point{x, 0}, 1) * cs.density(Point{x, 0}, t); }, c[0] - 12 * sig,
            c[0] + 12 * sig, 4000);
        expected = std::max(expected, std::abs(mean - battery[b].f(c, 1)));
      }
      CHECK(d.weak_errors[b] == doctest::Approx(expected).epsilon(1e-3));
    }
  }
}

TEST_CASE("double-slit metrics on synthetic trajectories") {
  DoubleSlitGeometry geo;
  geo.barrier_position = 0;
  geo.barrier_thickness = 0.6;
  geo.edge_width = 0.1;
  std::vector<double> times;
  for (int k = 0; k <= 20; ++k) times.push_back(0.1 * k);
  TrajectoryEnsemble ens(2, TrajectoryKind::bohm, times, 41);
  for (std::size_t p = 0; p < 40; ++p) {
    const double y0 = (p % 2 ? 1.0 : -1.0) * (3.0 + 0.02 * static_cast<double>(p));
    for (std::size_t k = 0; k < times.size(); ++k) {
      const double t = times[k];
      ens.set(k, p, Point{-2.0 + 3.0 * t, y0 + 0.1 * (y0 > 0 ? 1 : -1) * t * t}, Point{3.0, 0.2 * t});
    }
  }
  // One reflected particle that crosses the axis.
  for (std::size_t k = 0; k < times.size(); ++k) ens.set(k, 40, Point{-2.0, 0.5 - 0.5 * times[k]}, Point{0, -0.5});
  const auto m = double_slit_metrics(ens, geo, 7);
  CHECK(m.transmitted == 40);
  CHECK(m.channels == 2);
  CHECK(m.axis_crossings == 1);
  CHECK(m.exit_deviation > 0);
  CHECK(m.mean_curvature > 0);
  CHECK_THROWS_AS(double_slit_metrics(TrajectoryEnsemble(1, TrajectoryKind::bohm, times, 1), geo, 7), InvalidArgument);
}

TEST_CASE("the weak battery holds five smooth functions") {
  const auto& b = weak_battery();
  REQUIRE(b.size() == 5);
  for (const auto& f : b) CHECK(std::isfinite(f.f(Point{0.3, -0.2}, 2)));
  CHECK(b[0].f(Point{1.0, 2.0}, 2) == doctest::Approx(5.0));
  CHECK(b[0].f(Point{1.0, 2.0}, 1) == doctest::Approx(1.0));
}
