#include "porelec/app.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "porelec/convergence.hpp"
#include "porelec/errors.hpp"
#include "porelec/fields.hpp"
#include "porelec/io.hpp"

namespace porelec {

namespace {

using nlohmann::json;

void ensure_out_dir(const RunConfig& config) {
  const std::string dir = config.raw("out_dir");
  if (dir.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
}

void write_json(const std::string& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::Lcm: return "lcm";
    case Strategy::Dsm: return "dsm";
    case Strategy::Gcm: return "gcm";
  }
  return "?";
}

json conservation_json(const ConservationReport& c) {
  return {{"source_integral", c.source_integral},
          {"applied_current", c.applied_current},
          {"electrode_mismatch", c.electrode_mismatch},
          {"electrolyte_mismatch", c.electrolyte_mismatch},
          {"source_balance", c.source_balance},
          {"normalized", c.normalized},
          {"flagged", c.flagged}};
}

}  // namespace

int cmd_solve(const RunConfig& config, std::ostream& log) {
  const Problem problem = config.problem();
  const SolverConfig solver = config.solver();
  const ReferenceSpec reference = config.reference();
  const bool galvanostatic = std::holds_alternative<Galvanostatic>(problem.mode);
  if (!galvanostatic && solver.scheme == Scheme::Decoupled) {
    throw ConfigError("scheme = decoupled supports mode = galvanostatic only", "scheme");
  }
  ensure_out_dir(config);

  SolutionState state;
  if (!galvanostatic) {
    state = newton_solve(CoupledSystem::potentiostatic(problem), problem, solver, Strategy::Dsm);
  } else if (solver.scheme == Scheme::Coupled) {
    state = newton_coupled(problem, reference, solver);
  } else {
    state = picard_decoupled(problem, reference, solver);
  }

  write_field_csv(config.output_path("_fields.csv"), field_table(problem.grid, state));
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < state.history.size(); ++k) {
    rows.push_back({static_cast<double>(k), state.history[k]});
  }
  write_table_csv(config.output_path("_residuals.csv"), {"iter", "residual"}, rows);
  if (solver.scheme == Scheme::Decoupled) {
    rows.clear();
    for (std::size_t k = 0; k < state.objective_trace.size(); ++k) {
      rows.push_back({static_cast<double>(k), state.objective_trace[k]});
    }
    write_table_csv(config.output_path("_objective_trace.csv"), {"iter", "objective"}, rows);
  }

  json summary = {
      {"scheme", solver.scheme == Scheme::Coupled ? "coupled" : "decoupled"},
      {"strategy", galvanostatic ? strategy_name(reference.strategy) : "dirichlet"},
      {"mode", config.raw("mode")},
      {"field", config.raw("field")},
      {"nx", problem.grid.nx()},
      {"ny", problem.grid.ny()},
      {"converged", state.converged},
      {"iterations", state.iterations},
      {"final_residual", state.history.empty() ? 0.0 : state.history.back()},
      {"linear_iterations", state.linear_iterations},
      {"linear_failure", state.linear_failure},
      {"zero_pivots_replaced", state.zero_pivots_replaced},
      {"clamped", state.clamped},
      {"objective", state.objective},
      {"conservation", conservation_json(state.conservation)},
      {"message", state.message},
  };
  if (solver.scheme == Scheme::Decoupled) {
    summary["c_l"] = state.c_l;
    summary["search_iterations"] = state.search_iterations;
    summary["picard_iterations"] = state.picard_iterations;
  }
  const std::string field = config.raw("field");
  if (field == "bimodal" || field == "channelized") summary["seed"] = config.raw("seed");
  write_json(config.output_path("_summary.json"), summary);

  log << "solve: " << (state.converged ? "converged" : "NOT converged") << " after "
      << state.iterations << " iterations, conservation " << state.conservation.worst()
      << (state.conservation.flagged ? " (above 1e-6)" : "") << '\n';
  if (!state.converged) log << "solve: " << state.message << '\n';
  return state.converged ? kExitOk : kExitNotConverged;
}

int cmd_convergence(const RunConfig& config, std::ostream& log) {
  const ConvergenceSetup setup = config.convergence_setup();
  std::vector<std::size_t> nx;
  for (double v : config.numbers("nx_list")) {
    if (!(v >= 2.0) || v != std::floor(v)) {
      throw ConfigError("nx_list entries must be integers >= 2", "nx_list");
    }
    nx.push_back(static_cast<std::size_t>(v));
  }
  ensure_out_dir(config);
  const std::vector<ConvergenceRow> table = convergence_study(setup, nx);
  std::vector<std::vector<double>> rows;
  for (const ConvergenceRow& r : table) {
    rows.push_back(
        {static_cast<double>(r.nx), r.l2_error, r.h1_error, r.l2_slope, r.h1_slope});
    log << "nx " << r.nx << "  L2 " << r.l2_error << "  H1 " << r.h1_error;
    if (std::isfinite(r.l2_slope)) log << "  slope " << r.l2_slope;
    log << '\n';
  }
  write_table_csv(config.output_path("_convergence.csv"),
                  {"nx", "L2_error", "H1_error", "L2_slope", "H1_slope"}, rows);
  return kExitOk;
}

int cmd_objective_scan(const RunConfig& config, std::ostream& log) {
  const Problem problem = config.problem();
  if (!std::holds_alternative<Galvanostatic>(problem.mode)) {
    throw ConfigError("objective-scan needs mode = galvanostatic", "mode");
  }
  const long n = config.integer("n_points");
  if (n < 1) throw ConfigError("n_points must be at least 1", "n_points");
  const double lo = config.number("cl_min");
  const double hi = config.number("cl_max");
  std::vector<double> cs(static_cast<std::size_t>(n));
  for (long k = 0; k < n; ++k) {
    cs[static_cast<std::size_t>(k)] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) /
                                                            static_cast<double>(n - 1);
  }
  ensure_out_dir(config);
  const std::vector<double> values =
      objective_scan(problem, cs, config.reference(), config.solver());
  std::vector<std::vector<double>> rows;
  int failed = 0;
  std::size_t best = 0;
  for (std::size_t k = 0; k < cs.size(); ++k) {
    rows.push_back({cs[k], values[k]});
    if (std::isnan(values[k])) {
      ++failed;
    } else if (std::isnan(values[best]) || values[k] < values[best]) {
      best = k;
    }
  }
  write_table_csv(config.output_path("_objective.csv"), {"c_l", "objective"}, rows);
  if (failed > 0) log << "objective-scan: warning: " << failed << " points failed (nan rows)\n";
  if (!std::isnan(values[best])) {
    log << "objective-scan: minimum " << values[best] << " at c_l = " << cs[best] << '\n';
  }
  return kExitOk;
}

int cmd_genfield(const RunConfig& config, std::ostream& log) {
  const std::string kind = config.choice("field", {"homogeneous", "bimodal", "channelized", "file"});
  if (kind != "bimodal" && kind != "channelized") {
    throw ConfigError("genfield needs field = bimodal or channelized", "field");
  }
  const StructuredGrid grid = config.grid();
  const FieldGenConfig fc = config.field_config();
  ensure_out_dir(config);
  const PorosityField eps = generate_field(grid, fc);
  const ConductivityField cond = conductivity_from_porosity(eps, fc.sigma_solid, fc.kappa_bulk);
  const std::string tag = "field=" + kind + " seed=" + std::to_string(fc.seed) +
                          " nx=" + std::to_string(grid.nx()) + " ny=" + std::to_string(grid.ny());
  write_matrix_csv(config.output_path("_porosity.csv"), grid, eps.eps, tag + " porosity");
  write_matrix_csv(config.output_path("_sigma.csv"), grid, cond.sigma, tag + " sigma S/m");
  write_matrix_csv(config.output_path("_kappa.csv"), grid, cond.kappa, tag + " kappa S/m");
  const double mean = std::accumulate(eps.eps.begin(), eps.eps.end(), 0.0) /
                      static_cast<double>(eps.eps.size());
  log << "genfield: " << kind << " seed " << fc.seed << ", mean porosity " << mean
      << ", high phase spans x: " << (spans_x(eps, grid, fc.eps_high) ? "yes" : "no") << '\n';
  return kExitOk;
}

int cmd_sweep(const RunConfig& config, std::ostream& log) {
  const std::string mode = config.choice("sweep_mode", {"dirichlet", "neumann"});
  const std::vector<double> values = config.numbers("sweep_values");
  Problem problem = config.problem();
  const double v_applied = config.number("V_applied");
  const SolverConfig solver = config.solver();
  const double area = problem.grid.height() * problem.grid.length();
  ensure_out_dir(config);

  std::vector<SweepPoint> points;
  if (mode == "dirichlet") {
    problem.mode = PotentiostaticDirichlet{v_applied, 0.0};
    points = potentiostatic_dirichlet_sweep(problem, values, solver);
  } else {
    std::vector<double> j;
    for (double current : values) {
      if (current < 0.0) throw ConfigError("neumann sweep currents must be >= 0 A", "sweep_values");
      j.push_back(current / area);
      log << "sweep: I = " << current << " A -> j_sweep = " << j.back() << " A/m^2\n";
    }
    problem.mode = PotentiostaticNeumann{v_applied, 0.0};
    points = potentiostatic_neumann_sweep(problem, j, solver);
  }

  std::vector<std::vector<double>> rows;
  int failed = 0;
  for (std::size_t k = 0; k < points.size(); ++k) {
    const SweepPoint& p = points[k];
    const double current = p.total_current * problem.grid.length();
    rows.push_back({values[k], current, p.mean_eta, p.ok ? 1.0 : 0.0});
    if (!p.ok) {
      ++failed;
      log << "sweep: point " << values[k] << " failed: " << p.message << '\n';
    } else if (mode == "neumann") {
      log << "sweep: I = " << values[k] << " A, collector current " << current << " A\n";
    }
  }
  write_table_csv(config.output_path("_sweep.csv"),
                  {"sweep_value", "total_current", "mean_eta", "converged"}, rows);
  return failed == 0 ? kExitOk : kExitNotConverged;
}

int run_command(const std::string& name, const RunConfig& config, std::ostream& log,
                std::ostream& err) {
  try {
    if (name == "solve") return cmd_solve(config, log);
    if (name == "convergence") return cmd_convergence(config, log);
    if (name == "objective-scan") return cmd_objective_scan(config, log);
    if (name == "genfield") return cmd_genfield(config, log);
    if (name == "sweep") return cmd_sweep(config, log);
    err << "unknown command '" << name << "'\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ParameterError& e) {
    err << "parameter error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ConvergenceError& e) {
    err << "not converged: " << e.what();
    if (!e.history().empty()) err << " (last value " << e.history().back() << ")";
    err << '\n';
    return kExitNotConverged;
  } catch (const std::exception& e) {
    err << "failed: " << e.what() << '\n';
    return kExitNotConverged;
  }
}

}  // namespace porelec
