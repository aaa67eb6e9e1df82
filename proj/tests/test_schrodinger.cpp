#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "semiclassical/coherent.hpp"
#include "semiclassical/errors.hpp"
#include "semiclassical/schrodinger.hpp"

using namespace semiclassical;
using std::numbers::pi;

namespace {

// Free Gaussian packet, written out independently.
Complex free_gaussian(double x, double t, double hbar, double m, double sigma, double x0, double v) {
  const Complex i(0, 1);
  const double k = m * v / hbar;
  const Complex one_it = 1.0 + i * hbar * t / (2 * m * sigma * sigma);
  const double xc = x - x0 - v * t;
  return std::pow(2 * pi * sigma * sigma, -0.25) / std::sqrt(one_it) *
         std::exp(-xc * xc / (4 * sigma * sigma * one_it) + i * k * (x - x0) - i * hbar * k * k * t / (2 * m));
}

WaveField sample_free(const Grid& g, double t, double hbar, double m) {
  std::vector<Complex> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = free_gaussian(g.node(i)[0], t, hbar, m, 0.7, -2.0, 1.5);
  return WaveField(g, v, hbar, m, t);
}

double max_diff(const WaveField& a, const WaveField& b) {
  double e = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i) e = std::max(e, std::abs(a.values[i] - b.values[i]));
  return e;
}

// Squeezed, displaced oscillator state: no closed form needed.
WaveField squeezed(const Grid& g) {
  std::vector<Complex> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.node(i)[0];
    v[i] = std::exp(-(x - 1.0) * (x - 1.0) / 0.5) * std::polar(1.0, 0.8 * x);
  }
  WaveField psi(g, v, 1.0, 1.0);
  normalize(psi);
  return psi;
}

}  // namespace

TEST_CASE("free packet matches the analytic solution") {
  const Grid g = oracle::grid1(40.0, 512);
  const double hbar = 1.0, m = 1.0;
  const auto free = PotentialSpec::free(m);
  PropagatorConfig cfg;
  cfg.dt = 0.05;
  cfg.steps_per_output = 10;
  const auto ev = evolve(sample_free(g, 0, hbar, m), free, cfg, 2.0);
  REQUIRE(ev.snapshots.size() == 5);
  CHECK(max_diff(ev.snapshots.back(), sample_free(g, 2.0, hbar, m)) < 1e-10);
  CHECK(ev.observations.back().center[0] == doctest::Approx(-2.0 + 1.5 * 2.0).epsilon(1e-8));
}

TEST_CASE("norm is conserved over many steps") {
  const Grid g = oracle::grid1(16.0, 256);
  const auto osc = PotentialSpec::harmonic(1.0, 1.0);
  PropagatorConfig cfg;
  cfg.dt = 1e-3;
  Propagator prop(g, 1.0, 1.0, osc, cfg);
  auto psi = squeezed(g);
  prop.advance(psi, 10000);
  CHECK(std::abs(l2_norm(psi) - 1.0) < 1e-10);
}

TEST_CASE("fused advance matches repeated steps") {
  const Grid g = oracle::grid1(16.0, 128);
  const auto osc = PotentialSpec::harmonic(1.0, 1.0);
  PropagatorConfig cfg;
  cfg.dt = 0.005;
  Propagator prop(g, 1.0, 1.0, osc, cfg);
  auto a = squeezed(g), b = squeezed(g);
  prop.advance(a, 50);
  for (int i = 0; i < 50; ++i) prop.step(b);
  CHECK(max_diff(a, b) < 1e-12);
}

TEST_CASE("coherent state is reproduced by the propagator") {
  const Grid g = oracle::grid1(16.0, 256);
  const CoherentState cs(1, 1.0, 1.0, 1.0, Point{1.0, 0}, Point{0.5, 0});
  const auto osc = PotentialSpec::harmonic(1.0, 1.0);
  PropagatorConfig cfg;
  cfg.dt = 2 * pi / 4096;
  cfg.steps_per_output = 1024;
  const auto ev = evolve(cs.wavefunction(g, 0.0), osc, cfg, 2 * pi);
  for (std::size_t k = 0; k < ev.snapshots.size(); ++k) {
    const double t = ev.observations[k].time;
    CHECK(max_diff(ev.snapshots[k], cs.wavefunction(g, t)) < 1e-6);
  }
}

TEST_CASE("Strang splitting is second order in dt") {
  const Grid g = oracle::grid1(16.0, 128);
  const auto osc = PotentialSpec::harmonic(1.0, 1.0);
  auto run = [&](double dt, std::size_t n) {
    PropagatorConfig cfg;
    cfg.dt = dt;
    Propagator prop(g, 1.0, 1.0, osc, cfg);
    auto psi = squeezed(g);
    prop.advance(psi, n);
    return psi;
  };
  const auto ref = run(1.0 / 12800, 12800);
  const double e1 = max_diff(run(1.0 / 200, 200), ref);
  const double e2 = max_diff(run(1.0 / 400, 400), ref);
  CHECK(e1 / e2 > 3.5);
  CHECK(e1 / e2 < 4.5);
}

TEST_CASE("energy is conserved without a mask") {
  const Grid g = oracle::grid1(16.0, 256);
  const auto osc = PotentialSpec::harmonic(1.0, 1.0);
  PropagatorConfig cfg;
  cfg.dt = 1e-3;
  Propagator prop(g, 1.0, 1.0, osc, cfg);
  auto psi = squeezed(g);
  const double e0 = energy(psi, osc);
  prop.advance(psi, 2000);
  CHECK(std::abs(energy(psi, osc) - e0) / e0 < 1e-5);
}

TEST_CASE("absorbing mask removes probability and reports it") {
  const Grid g = oracle::grid1(20.0, 256);
  const auto free = PotentialSpec::free(1.0);
  PropagatorConfig cfg;
  cfg.dt = 0.01;
  cfg.boundary_mask = absorbing_mask(g, 2.0);
  Propagator prop(g, 1.0, 1.0, free, cfg);
  auto psi = sample_free(g, 0, 1.0, 1.0);
  normalize(psi);
  const double absorbed = prop.advance(psi, 800);
  CHECK(absorbed > 0.1);
  CHECK(std::abs(l2_norm(psi) * l2_norm(psi) + absorbed - 1.0) < 1e-10);
}

TEST_CASE("aliasing and resolution guards") {
  const Grid g = oracle::grid1(16.0, 256);
  PropagatorConfig cfg;
  cfg.dt = 1.0;
  CHECK_THROWS_AS(Propagator(g, 1.0, 1.0, PotentialSpec::harmonic(1.0, 1.0), cfg), AliasingError);
  CHECK_NOTHROW(Propagator(g, 1.0, 1.0, PotentialSpec::free(1.0), cfg));
  CHECK(kinetic_phase_per_step(g, 1.0, 1.0, 1.0) == doctest::Approx(g.max_k_squared() / 2));

  const auto coarse = check_resolution(g, 0.001, 1.0, 1.0);
  CHECK_FALSE(coarse.ok);
  CHECK(coarse.wavelength == doctest::Approx(2 * pi * 0.001));
  CHECK(coarse.required_points[0] >= 16.0 / (2 * pi * 0.001) * 8);
  CHECK(check_resolution(g, 1.0, 1.0, 1.0).ok);
  CHECK(fft_size_at_least(300) == 512);
  CHECK(fft_size_at_least(3) == 8);
}

TEST_CASE("output count requires commensurate times") {
  PropagatorConfig cfg;
  cfg.dt = 0.1;
  cfg.steps_per_output = 2;
  CHECK(output_count(cfg, 1.0) == 5);
  CHECK_THROWS_AS(output_count(cfg, 1.05), InvalidArgument);
}
