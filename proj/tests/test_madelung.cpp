#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "semiclassical/coherent.hpp"
#include "semiclassical/errors.hpp"
#include "semiclassical/madelung.hpp"

using namespace semiclassical;
using std::numbers::pi;

namespace {

WaveField chirped(const Grid& g, double hbar, double s, double p, double c) {
  std::vector<Complex> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.node(i)[0];
    const double rho = std::exp(-x * x / (2 * s * s)) / std::sqrt(2 * pi * s * s);
    v[i] = std::polar(std::sqrt(rho), (p * x + c * x * x) / hbar);
  }
  return WaveField(g, v, hbar, 1.0);
}

}  // namespace

TEST_CASE("gaussian with a chirp: density, unwrapped action and Q") {
  const Grid g = oracle::grid1(20.0, 1024);
  const double hbar = 0.05, s = 1.0, p = 0.7, c = 0.3;
  const auto f = decompose(chirped(g, hbar, s, p, c));
  CHECK(f.components == 1);
  CHECK(f.vortices == 0);
  const std::size_t ref = f.seed;
  const double x_ref = g.node(ref)[0];
  double rho_err = 0, s_err = 0, q_err = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!f.valid[i]) continue;
    const double x = g.node(i)[0];
    if (std::abs(x) > 5) continue;
    rho_err = std::max(rho_err, std::abs(f.rho.values[i] - std::exp(-x * x / 2) / std::sqrt(2 * pi)));
    const double ds = (f.action.values[i] - f.action.values[ref]) - (p * (x - x_ref) + c * (x * x - x_ref * x_ref));
    s_err = std::max(s_err, std::abs(ds));
    const double q = -(hbar * hbar / 2) * (x * x / (4 * s * s * s * s) - 1 / (2 * s * s));
    q_err = std::max(q_err, std::abs(f.qpotential.values[i] - q));
  }
  CHECK(rho_err < 1e-12);
  CHECK(s_err < 1e-10);
  CHECK(q_err < 1e-8);
  // The action spans many branches of 2 pi hbar here.
  CHECK(c * 25 > 10 * 2 * pi * hbar);
}

TEST_CASE("quantum potential at an off-grid point") {
  const Grid g = oracle::grid1(20.0, 256);
  const double hbar = 1.0;
  const auto f = decompose(chirped(g, hbar, 1.0, 0.0, 0.0));
  const double x = 0.4321;
  const double q = -(hbar * hbar / 2) * (x * x / 4 - 0.5);
  CHECK(quantum_potential_at(f, Point{x, 0}) == doctest::Approx(q).epsilon(1e-9));
}

TEST_CASE("disconnected support is detected") {
  const Grid g = oracle::grid1(40.0, 512);
  std::vector<Complex> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.node(i)[0];
    v[i] = std::exp(-(x - 8) * (x - 8)) + std::exp(-(x + 8) * (x + 8));
  }
  const WaveField psi(g, v, 1.0, 1.0);
  DecomposeOptions opt;
  opt.rho_floor_relative = 1e-6;
  CHECK_THROWS_AS(decompose(psi, opt), DisconnectedSupport);
  opt.allow_disconnected = true;
  const auto f = decompose(psi, opt);
  CHECK(f.components == 2);
  CHECK(f.disconnected());
  CHECK_THROWS_AS(f.require_connected(), DisconnectedSupport);
  std::size_t undefined = 0;
  for (std::size_t i = 0; i < g.size(); ++i) undefined += std::isnan(f.action.values[i]) ? 1 : 0;
  CHECK(undefined > 0);
}

TEST_CASE("a vortex is counted") {
  const Grid g = oracle::grid2(10.0, 64);
  std::vector<Complex> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto p = g.node(i);
    const double x = p[0] - 0.05, y = p[1] - 0.05;
    v[i] = Complex(x, y) * std::exp(-(x * x + y * y) / 2);
  }
  DecomposeOptions opt;
  opt.rho_floor_relative = 1e-8;
  const auto f = decompose(WaveField(g, v, 1.0, 1.0), opt);
  CHECK(f.vortices >= 1);
}

TEST_CASE("reconstruct inverts decompose") {
  const Grid g = oracle::grid1(20.0, 256);
  const auto psi = chirped(g, 0.2, 1.0, 0.4, 0.1);
  const auto f = decompose(psi);
  const auto back = reconstruct(f);
  double e = 0;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (f.valid[i]) e = std::max(e, std::abs(back[i] - psi.values[i]));
  CHECK(e < 1e-12);

  auto shifted = f;
  align_action(shifted, f.seed, f.action.values[f.seed] + 2 * pi * 0.2 * 3 + 0.01);
  CHECK(shifted.action.values[f.seed] - f.action.values[f.seed] == doctest::Approx(2 * pi * 0.2 * 3));
}

TEST_CASE("Madelung residuals vanish on the coherent state") {
  const Grid g = oracle::grid2(14.0, 128);
  const CoherentState cs(2, 1.0, 1.0, 0.5, Point{1.0, 0.0}, Point{0.0, 1.0});
  const auto osc = PotentialSpec::harmonic(1.0, 1.0);
  const double t = 0.7, dt = 1e-4;
  DecomposeOptions opt;
  opt.rho_floor_relative = 1e-10;
  const auto a = decompose(cs.wavefunction(g, t - dt), opt);
  const auto b = decompose(cs.wavefunction(g, t + dt), opt);
  const auto r = madelung_residuals(a, b, osc);
  CHECK(r.time == doctest::Approx(t));
  CHECK(r.coverage > 0.05);
  CHECK(r.hj_max < 1e-6);
  CHECK(r.continuity_max < 1e-6);

  // A wrong potential leaves a visible Hamilton-Jacobi residual.
  const auto wrong = madelung_residuals(a, b, PotentialSpec::harmonic(1.0, 1.2));
  CHECK(wrong.hj_max > 1e-2);
}
