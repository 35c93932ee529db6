#pragma once

#include <ostream>
#include <string>

#include "porelec/config.hpp"

namespace porelec {

enum ExitCode : int {
  kExitOk = 0,
  kExitNotConverged = 2,
  kExitConfig = 3,
  kExitIo = 4,
};

// Each command writes its CSV/JSON files under out_dir with the configured
// stem, logs progress to `log` and returns an exit code. Errors propagate as
// exceptions; run_command maps them to exit codes.

/// <stem>_fields.csv, <stem>_residuals.csv (iter,residual), <stem>_summary.json.
int cmd_solve(const RunConfig& config, std::ostream& log);
/// <stem>_convergence.csv (nx,L2_error,H1_error,L2_slope,H1_slope).
int cmd_convergence(const RunConfig& config, std::ostream& log);
/// <stem>_objective.csv (c_l,objective) over [cl_min, cl_max].
int cmd_objective_scan(const RunConfig& config, std::ostream& log);
/// <stem>_porosity.csv, <stem>_sigma.csv, <stem>_kappa.csv.
int cmd_genfield(const RunConfig& config, std::ostream& log);
/// <stem>_sweep.csv (sweep_value,total_current,mean_eta,converged); current in A.
int cmd_sweep(const RunConfig& config, std::ostream& log);

/// Dispatches by subcommand name and converts exceptions to exit codes,
/// writing the diagnostic to `err`.
int run_command(const std::string& name, const RunConfig& config, std::ostream& log,
                std::ostream& err);

}  // namespace porelec
