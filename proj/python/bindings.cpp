#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "semiclassical/classical_limit.hpp"
#include "semiclassical/coherent.hpp"
#include "semiclassical/errors.hpp"
#include "semiclassical/experiments.hpp"
#include "semiclassical/madelung.hpp"
#include "semiclassical/output.hpp"
#include "semiclassical/scenario.hpp"
#include "semiclassical/schrodinger.hpp"

namespace py = pybind11;
namespace sc = semiclassical;

namespace {

using ComplexArray = py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>;
using RealArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

sc::Grid grid_for(const py::buffer_info& info, const std::vector<double>& extent) {
  if (info.ndim < 1 || info.ndim > 2) throw sc::InvalidArgument("arrays must be 1D or 2D");
  if (extent.size() != static_cast<std::size_t>(info.ndim)) {
    throw sc::InvalidArgument("extent needs one entry per array axis");
  }
  std::vector<std::size_t> points;
  for (auto s : info.shape) points.push_back(static_cast<std::size_t>(s));
  return sc::make_grid(points.size(), extent, points);
}

py::array_t<double> to_numpy(const std::vector<double>& v, const sc::Grid& g) {
  std::vector<py::ssize_t> shape;
  for (std::size_t a = 0; a < g.dim(); ++a) shape.push_back(static_cast<py::ssize_t>(g.points(a)));
  py::array_t<double> out(shape);
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

sc::Point to_point(const std::vector<double>& v) {
  sc::Point p{0.0, 0.0};
  if (v.empty() || v.size() > sc::kMaxDim) throw sc::InvalidArgument("points have one or two components");
  for (std::size_t i = 0; i < v.size(); ++i) p[i] = v[i];
  return p;
}

std::vector<sc::Override> overrides_from(const std::map<std::string, std::string>& m) {
  return {m.begin(), m.end()};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Schroedinger, Madelung, Bohm and min-plus tools for the semiclassical limit";
  m.attr("__version__") = sc::kToolVersion;

  auto base = py::register_exception<sc::Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<sc::ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<sc::ResolutionError>(m, "ResolutionError", base.ptr());
  py::register_exception<sc::CausticError>(m, "CausticError", base.ptr());
  py::register_exception<sc::InvalidArgument>(m, "InvalidArgument", base.ptr());

  py::class_<sc::PotentialSpec>(m, "Potential")
      .def_static("free", &sc::PotentialSpec::free, py::arg("mass"), py::arg("offset") = 0.0)
      .def_static(
          "harmonic", &sc::PotentialSpec::harmonic, py::arg("mass"), py::arg("omega"), py::arg("offset") = 0.0)
      .def_static(
          "linear",
          [](double mass, const std::vector<double>& force, double offset) {
            return sc::PotentialSpec::linear(mass, to_point(force), offset);
          },
          py::arg("mass"), py::arg("force"), py::arg("offset") = 0.0)
      .def_property_readonly("mass", &sc::PotentialSpec::mass)
      .def("__repr__", &sc::PotentialSpec::describe);

  py::class_<sc::CoherentState>(m, "CoherentState")
      .def(py::init([](std::size_t dim, double omega, double mass, double hbar, const std::vector<double>& x0,
                       const std::vector<double>& v0) {
             return sc::CoherentState(dim, omega, mass, hbar, to_point(x0), to_point(v0));
           }),
           py::arg("dim"), py::arg("omega"), py::arg("mass"), py::arg("hbar"), py::arg("x0"), py::arg("v0"))
      .def_property_readonly("sigma_hbar", &sc::CoherentState::sigma_hbar)
      .def("xi", [](const sc::CoherentState& c, double t) { return c.xi(t); })
      .def("density", [](const sc::CoherentState& c, const std::vector<double>& x,
                         double t) { return c.density(to_point(x), t); })
      .def("action", [](const sc::CoherentState& c, const std::vector<double>& x,
                        double t) { return c.action(to_point(x), t); })
      .def("quantum_potential", [](const sc::CoherentState& c, const std::vector<double>& x,
                                   double t) { return c.quantum_potential(to_point(x), t); })
      .def("g", &sc::CoherentState::g)
      .def("g_quadrature", &sc::CoherentState::g_quadrature)
      .def(
          "wavefunction",
          [](const sc::CoherentState& c, const std::vector<double>& extent, const std::vector<std::size_t>& points,
             double t) {
            const auto g = sc::make_grid(points.size(), extent, points);
            const auto psi = c.wavefunction(g, t);
            std::vector<py::ssize_t> shape(points.begin(), points.end());
            py::array_t<std::complex<double>> out(shape);
            std::copy(psi.values.begin(), psi.values.end(), out.mutable_data());
            return out;
          },
          py::arg("extent"), py::arg("points"), py::arg("t"));

  m.def(
      "evolve",
      [](ComplexArray psi, const std::vector<double>& extent, double hbar, const sc::PotentialSpec& potential,
         double dt, std::size_t steps) {
        const auto info = psi.request();
        const auto g = grid_for(info, extent);
        const auto* p = psi.data();
        sc::WaveField w(g, std::vector<sc::Complex>(p, p + g.size()), hbar, potential.mass());
        sc::Propagator prop(g, hbar, potential.mass(), potential, sc::PropagatorConfig{dt, 1, std::nullopt});
        {
          py::gil_scoped_release release;
          prop.advance(w, steps);
        }
        py::array_t<std::complex<double>> out(info.shape);
        std::copy(w.values.begin(), w.values.end(), out.mutable_data());
        return out;
      },
      py::arg("psi"), py::arg("extent"), py::arg("hbar"), py::arg("potential"), py::arg("dt"), py::arg("steps"),
      "Advances psi by `steps` split-step Fourier steps of size dt on the periodic box [-L/2, L/2).");

  m.def(
      "decompose",
      [](ComplexArray psi, const std::vector<double>& extent, double hbar, double mass, double rho_floor_relative) {
        const auto info = psi.request();
        const auto g = grid_for(info, extent);
        const auto* p = psi.data();
        sc::WaveField w(g, std::vector<sc::Complex>(p, p + g.size()), hbar, mass);
        sc::DecomposeOptions opt;
        opt.rho_floor_relative = rho_floor_relative;
        opt.allow_disconnected = true;
        const auto f = sc::decompose(w, opt);
        py::dict out;
        out["rho"] = to_numpy(f.rho.values, g);
        out["action"] = to_numpy(f.action.values, g);
        out["qpotential"] = to_numpy(f.qpotential.values, g);
        out["components"] = f.components;
        out["vortices"] = f.vortices;
        return out;
      },
      py::arg("psi"), py::arg("extent"), py::arg("hbar"), py::arg("mass"), py::arg("rho_floor_relative") = 1e-12,
      "Madelung density, unwrapped action (NaN below the floor) and quantum potential.");

  m.def(
      "hopf_lax",
      [](const std::function<double(double)>& s0, const sc::PotentialSpec& potential, double t, double extent,
         std::size_t points, double scan_lower, double scan_upper, std::size_t scan_points) {
        const auto g = sc::make_grid(1, std::vector<double>{extent}, std::vector<std::size_t>{points});
        const auto sol = sc::hopf_lax_solve([&](const sc::Point& x) { return s0(x[0]); }, potential, t, g,
                                            sc::ScanGrid::line(scan_lower, scan_upper, scan_points));
        std::vector<double> argmin(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) argmin[i] = sol.argmin[i][0];
        py::dict out;
        out["x"] = [&] {
          std::vector<double> x(g.size());
          for (std::size_t i = 0; i < g.size(); ++i) x[i] = g.coordinate(0, i);
          return to_numpy(x, g);
        }();
        out["S"] = to_numpy(sol.S.values, g);
        out["argmin"] = to_numpy(argmin, g);
        out["multivalued"] = sol.multivalued_count;
        return out;
      },
      py::arg("s0"), py::arg("potential"), py::arg("t"), py::arg("extent"), py::arg("points"),
      py::arg("scan_lower"), py::arg("scan_upper"), py::arg("scan_points") = 2001,
      "1D min-plus solution S(x, t) = min_x0 [S0(x0) + S_cl(x, t; x0)] on a uniform grid.");

  py::class_<sc::Scenario>(m, "Scenario")
      .def_readonly("name", &sc::Scenario::name)
      .def_readonly("dim", &sc::Scenario::dim)
      .def_readonly("seed", &sc::Scenario::seed)
      .def_readonly("hbar_divisors", &sc::Scenario::hbar_divisors)
      .def_property_readonly("kind", [](const sc::Scenario& s) { return std::string(sc::to_string(s.kind)); })
      .def("echo", &sc::Scenario::echo);

  m.def(
      "parse_scenario",
      [](const std::string& text, const std::map<std::string, std::string>& overrides) {
        return sc::parse_scenario(text, overrides_from(overrides));
      },
      py::arg("text"), py::arg("overrides") = std::map<std::string, std::string>{});

  m.def("plan_rungs", [](const sc::Scenario& s) {
    py::list out;
    for (const auto& p : sc::plan_rungs_unchecked(s)) {
      py::dict d;
      d["divisor"] = p.divisor;
      d["hbar"] = p.hbar;
      d["required_points"] = p.required_points;
      std::vector<std::size_t> pts;
      for (std::size_t a = 0; a < p.grid.dim(); ++a) pts.push_back(p.grid.points(a));
      d["points"] = pts;
      d["resolved"] = p.resolved;
      d["dt"] = p.dt;
      d["steps"] = p.steps_per_output * p.outputs;
      out.append(d);
    }
    return out;
  });

  m.def(
      "run",
      [](const sc::Scenario& s, const std::optional<std::string>& out_dir, std::size_t jobs) {
        const std::string started = sc::utc_timestamp();
        sc::SweepResult result;
        {
          py::gil_scoped_release release;
          sc::SweepOptions opt;
          opt.jobs = jobs;
          result = sc::run_sweep(s, opt);
        }
        if (out_dir) sc::write_run_directory(*out_dir, s, result, started, sc::utc_timestamp());
        return sc::metrics_json(result.report);
      },
      py::arg("scenario"), py::arg("out_dir") = py::none(), py::arg("jobs") = 1,
      "Runs the sweep; returns metrics.json text and writes the run directory when out_dir is given.");
}
