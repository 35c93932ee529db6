#include <pybind11/pybind11.h>
#include <pybind11/numpy.h>
#include <pybind11/stl.h>

#include <sstream>

#include "porelec/app.hpp"
#include "porelec/convergence.hpp"
#include "porelec/errors.hpp"
#include "porelec/exact1d.hpp"

namespace py = pybind11;
using namespace porelec;

namespace {

std::string to_value(const py::handle& v) {
  if (py::isinstance<py::bool_>(v)) return v.cast<bool>() ? "true" : "false";
  if (py::isinstance<py::float_>(v)) {
    std::ostringstream s;
    s.precision(17);
    s << v.cast<double>();
    return s.str();
  }
  if (py::isinstance<py::list>(v) || py::isinstance<py::tuple>(v)) {
    std::string out;
    for (const py::handle& item : v) out += (out.empty() ? "" : ",") + to_value(item);
    return out;
  }
  return py::str(v).cast<std::string>();
}

RunConfig make_config(const py::dict& overrides) {
  RunConfig c;
  for (const auto& [k, v] : overrides) c.set(py::str(k).cast<std::string>(), to_value(v));
  return c;
}

py::array_t<double> vec_array(const std::vector<double>& v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

// (ny, nx) view of a y-major cell field.
py::array_t<double> grid_array(const std::vector<double>& v, const StructuredGrid& g) {
  py::array_t<double> out(std::vector<py::ssize_t>{static_cast<py::ssize_t>(g.ny()),
                                                   static_cast<py::ssize_t>(g.nx())});
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

py::dict solution_dict(const SolutionState& s, const StructuredGrid& g) {
  py::dict d;
  d["phi_e"] = grid_array(s.phi_e, g);
  d["phi_l"] = grid_array(s.phi_l, g);
  d["eta"] = grid_array(s.eta, g);
  d["j"] = grid_array(s.j, g);
  d["history"] = s.history;
  d["iterations"] = s.iterations;
  d["converged"] = s.converged;
  d["objective"] = s.objective;
  d["c_l"] = s.c_l;
  d["search_iterations"] = s.search_iterations;
  d["picard_iterations"] = s.picard_iterations;
  d["conservation"] = py::dict(py::arg("source_integral") = s.conservation.source_integral,
                               py::arg("applied_current") = s.conservation.applied_current,
                               py::arg("source_balance") = s.conservation.source_balance,
                               py::arg("electrode_mismatch") = s.conservation.electrode_mismatch,
                               py::arg("electrolyte_mismatch") = s.conservation.electrolyte_mismatch,
                               py::arg("flagged") = s.conservation.flagged);
  d["message"] = s.message;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Coupled electrode/electrolyte potential solver";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.def("derive_coefficients", [](double s, double j0, double F, double R, double T) {
    const SourceCoefficients c = derive_coefficients(s, j0, F, R, T);
    return py::make_tuple(c.a, c.b);
  }, py::arg("s"), py::arg("j0"), py::arg("F") = 96485.0, py::arg("R") = 8.314, py::arg("T") = 298.15);
  m.def("overpotential", &overpotential, py::arg("phi_e"), py::arg("phi_l"), py::arg("E_eq"));
  m.def("bv_source", py::vectorize(&bv_source), py::arg("eta"), py::arg("a"), py::arg("b"));
  m.def("reaction_current", py::vectorize(&reaction_current), py::arg("eta"), py::arg("j0"), py::arg("b"));
  m.def("bruggeman", &bruggeman, py::arg("eps"), py::arg("sigma_solid"), py::arg("kappa_bulk"));

  m.def("default_config", [] {
    const RunConfig c;
    py::dict d;
    std::istringstream in(RunConfig::documented_defaults());
    for (std::string line; std::getline(in, line);) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(0, eq);
      key.erase(key.find_last_not_of(" \t") + 1);
      d[py::str(key)] = c.raw(key);
    }
    return d;
  }, "Every config key with its default value (as strings).");

  m.def("solve", [](const py::dict& overrides) {
    const RunConfig c = make_config(overrides);
    const Problem p = c.problem();
    const SolverConfig solver = c.solver();
    SolutionState s;
    {
      py::gil_scoped_release release;
      if (std::holds_alternative<Galvanostatic>(p.mode)) {
        s = solver.scheme == Scheme::Coupled ? newton_coupled(p, c.reference(), solver)
                                             : picard_decoupled(p, c.reference(), solver);
      } else {
        s = newton_solve(CoupledSystem::potentiostatic(p), p, solver, Strategy::Dsm);
      }
    }
    return solution_dict(s, p.grid);
  }, py::arg("config") = py::dict(),
     "Solve the configured problem. Keys are the CLI config keys; returns fields shaped (ny, nx).");

  m.def("objective_scan", [](const py::dict& overrides, const std::vector<double>& c_values) {
    const RunConfig c = make_config(overrides);
    SolverConfig solver = c.solver();
    solver.scheme = Scheme::Decoupled;
    py::gil_scoped_release release;
    return objective_scan(c.problem(), c_values, c.reference(), solver);
  }, py::arg("config"), py::arg("c_values"));

  m.def("generate_porosity", [](const py::dict& overrides) {
    const RunConfig c = make_config(overrides);
    const StructuredGrid g = c.grid();
    return grid_array(generate_field(g, c.field_config()).eps, g);
  }, py::arg("config") = py::dict());

  m.def("convergence", [](const py::dict& overrides, const std::vector<std::size_t>& nx) {
    const RunConfig c = make_config(overrides);
    std::vector<ConvergenceRow> rows;
    {
      py::gil_scoped_release release;
      rows = convergence_study(c.convergence_setup(), nx);
    }
    py::list out;
    for (const ConvergenceRow& r : rows) {
      out.append(py::dict(py::arg("nx") = r.nx, py::arg("L2_error") = r.l2_error,
                          py::arg("H1_error") = r.h1_error, py::arg("L2_slope") = r.l2_slope,
                          py::arg("H1_slope") = r.h1_slope));
    }
    return out;
  }, py::arg("config"), py::arg("nx"));

  m.def("shoot", [](double j_applied, double W, int ode_steps) {
    const PhysicalParams params;
    ShootingOptions o;
    o.ode_steps = ode_steps;
    const ExactProblem p =
        ExactProblem::galvanostatic(params, params.sigma_ref(), params.kappa_ref(), W, j_applied);
    const ShootingResult r = shoot_eta0(p, o);
    py::dict d;
    d["eta0"] = r.eta0;
    d["x"] = vec_array(r.x);
    d["eta"] = vec_array(r.eta);
    d["deta"] = vec_array(r.deta);
    d["first_integral_drift"] = r.first_integral_drift;
    return d;
  }, py::arg("j_applied"), py::arg("W") = 5e-3, py::arg("ode_steps") = 10000,
     "1D exact eta profile for the reference parameters (shooting).");

  m.def("run", [](const std::string& command, const py::dict& overrides) {
    const RunConfig c = make_config(overrides);
    std::ostringstream log, err;
    int code = 0;
    {
      py::gil_scoped_release release;
      code = run_command(command, c, log, err);
    }
    return py::make_tuple(code, log.str(), err.str());
  }, py::arg("command"), py::arg("config") = py::dict(),
     "Run a CLI subcommand; returns (exit_code, log, errors).");
}
