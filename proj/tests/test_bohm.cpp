#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "semiclassical/bohm.hpp"
#include "semiclassical/coherent.hpp"
#include "semiclassical/errors.hpp"
#include "semiclassical/schrodinger.hpp"

using namespace semiclassical;
using std::numbers::pi;

namespace {

RealField gaussian_density(const Grid& g, double c, double s) {
  RealField rho(g, FieldUnits::density);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.node(i)[0];
    rho.values[i] = std::exp(-(x - c) * (x - c) / (2 * s * s)) / std::sqrt(2 * pi * s * s);
  }
  return rho;
}

}  // namespace

TEST_CASE("plane wave gives a uniform velocity") {
  const Grid g = oracle::grid1(2 * pi, 64);
  const double hbar = 0.5, m = 2.0, k = 3.0;
  std::vector<Complex> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = std::polar(1.0, k * g.node(i)[0]);
  const auto vf = velocity_field(decompose(WaveField(g, v, hbar, m)));
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(vf.components[0][i] == doctest::Approx(hbar * k / m));
  Point out;
  REQUIRE(interpolate_velocity(vf, Point{0.3, 0}, out));
  CHECK(out[0] == doctest::Approx(hbar * k / m));
}

TEST_CASE("sampler reproduces the moments of rho0 and is seed-deterministic") {
  const Grid g = oracle::grid1(20.0, 1024);
  const auto rho = gaussian_density(g, 0.7, 1.3);
  const auto a = sample_initial_positions(rho, 20000, 99);
  const auto b = sample_initial_positions(rho, 20000, 99);
  const auto c = sample_initial_positions(rho, 20000, 100);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  double mean = 0, var = 0;
  for (const auto& p : a) mean += p[0];
  mean /= static_cast<double>(a.size());
  for (const auto& p : a) var += (p[0] - mean) * (p[0] - mean);
  var /= static_cast<double>(a.size() - 1);
  CHECK(std::abs(mean - 0.7) < 4 * 1.3 / std::sqrt(20000.0));
  CHECK(std::abs(var - 1.69) < 0.05);

  const Grid g2 = oracle::grid2(10.0, 64);
  RealField rho2(g2, FieldUnits::density);
  for (std::size_t i = 0; i < g2.size(); ++i) {
    const auto p = g2.node(i);
    rho2.values[i] = std::exp(-((p[0] - 1) * (p[0] - 1) + p[1] * p[1]) / 2);
  }
  const auto s2 = sample_initial_positions(rho2, 10000, 5);
  double mx = 0, my = 0;
  for (const auto& p : s2) {
    mx += p[0];
    my += p[1];
  }
  CHECK(std::abs(mx / 1e4 - 1.0) < 0.05);
  CHECK(std::abs(my / 1e4) < 0.05);
}

TEST_CASE("Bohm trajectories of a free gaussian follow the analytic law") {
  const Grid g = oracle::grid1(30.0, 512);
  const double hbar = 1.0, m = 1.0, s = 0.8, c0 = -3.0, v0 = 1.0;
  std::vector<Complex> psi0(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.node(i)[0];
    psi0[i] = std::pow(2 * pi * s * s, -0.25) * std::exp(-(x - c0) * (x - c0) / (4 * s * s)) *
              std::polar(1.0, m * v0 * x / hbar);
  }
  PropagatorConfig cfg;
  cfg.dt = 0.01;
  cfg.steps_per_output = 1;
  const auto ev = evolve(WaveField(g, psi0, hbar, m), PotentialSpec::free(m), cfg, 2.0);
  std::vector<double> times;
  for (const auto& o : ev.observations) times.push_back(o.time);
  const std::vector<Point> starts{{c0 - 1.0, 0}, {c0, 0}, {c0 + 0.5, 0}, {c0 + 1.7, 0}};
  EnsembleIntegrator integ(starts, 1, times);
  DecomposeOptions opt;
  opt.rho_floor_relative = 1e-10;
  for (const auto& snap : ev.snapshots) integ.push(velocity_field(decompose(snap, opt)));
  REQUIRE(integ.complete());
  const auto& ens = integ.ensemble();
  for (std::size_t k = 0; k < times.size(); k += 50) {
    const double t = times[k];
    const double grow = std::sqrt(1 + std::pow(hbar * t / (2 * m * s * s), 2));
    for (std::size_t p = 0; p < starts.size(); ++p) {
      const double expected = c0 + v0 * t + (starts[p][0] - c0) * grow;
      // Velocities are linear in time between samples 0.01 apart: an
      // O(dt^2) interpolation error accumulates along the path.
      CHECK(std::abs(ens.position(k, p)[0] - expected) < 1e-4);
    }
  }
  const auto d = dispersion(ens, times.size() - 1);
  CHECK(d.live == starts.size());
}

TEST_CASE("spin term matches the closed form on a coherent state") {
  const Grid g = oracle::grid2(20.0, 160);
  const CoherentState cs(2, 1.0, 1.0, 1.0, Point{1.0, 0.0}, Point{0.0, 1.0});
  const double t = 0.6;
  const auto vf = velocity_field(decompose(cs.wavefunction(g, t)), SpinAxis{0, 0, 1});
  for (const Point x : {Point{0.5, 0.75}, Point{1.0, 1.0}, Point{0.0, 0.25}}) {
    const std::size_t i = g.flat_index(static_cast<std::size_t>((x[0] + 10) / g.spacing(0) + 0.5),
                                       static_cast<std::size_t>((x[1] + 10) / g.spacing(1) + 0.5));
    const Point exact = cs.velocity(g.node(i), t, SpinAxis{0, 0, 1});
    CHECK(vf.components[0][i] == doctest::Approx(exact[0]).epsilon(1e-8));
    CHECK(vf.components[1][i] == doctest::Approx(exact[1]).epsilon(1e-8));
  }
  CHECK_THROWS_AS(velocity_field(decompose(cs.wavefunction(g, t)), SpinAxis{1, 0, 0}), SpinAxisUnsupported);
}

TEST_CASE("particles entering the absorbing layer are absorbed") {
  const Grid g = oracle::grid1(20.0, 256);
  const double hbar = 1.0, m = 1.0;
  std::vector<Complex> psi0(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.node(i)[0];
    psi0[i] = std::exp(-x * x / 2) * std::polar(1.0, 4.0 * x);
  }
  WaveField psi(g, psi0, hbar, m);
  normalize(psi);
  PropagatorConfig cfg;
  cfg.dt = 0.01;
  cfg.steps_per_output = 10;
  const auto mask = absorbing_mask(g, 2.0);
  cfg.boundary_mask = mask;
  const auto ev = evolve(psi, PotentialSpec::free(m), cfg, 4.0);
  std::vector<double> times;
  for (const auto& o : ev.observations) times.push_back(o.time);
  EnsembleIntegrator integ({{0.0, 0}, {0.5, 0}}, 1, times);
  DecomposeOptions opt;
  opt.rho_floor_relative = 1e-10;
  opt.allow_disconnected = true;
  for (const auto& snap : ev.snapshots) integ.push(velocity_field(decompose(snap, opt), std::nullopt, &mask));
  const auto ens = integ.take();
  CHECK(ens.absorbed(0));
  CHECK(ens.absorbed(1));
  const std::size_t k = *ens.absorbed_at(0);
  CHECK(ens.position(times.size() - 1, 0)[0] == ens.position(k, 0)[0]);
  CHECK(ens.position(k, 0)[0] > 6.0);
}
