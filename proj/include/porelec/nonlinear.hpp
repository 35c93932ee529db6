#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "porelec/grid.hpp"
#include "porelec/linear_solvers.hpp"
#include "porelec/model.hpp"
#include "porelec/sparse.hpp"

namespace porelec {

enum class Strategy { Lcm, Dsm, Gcm };
enum class Scheme { Decoupled, Coupled };
enum class InitStrategy { Zeros, PhiLEqMinusEeq };
enum class FdMode { Forward, Central };

/// How the galvanostatic null space (a shared additive constant) is removed.
struct ReferenceSpec {
  Strategy strategy = Strategy::Lcm;
  /// LCM: electrode cells whose potential is pinned. Empty means the single
  /// cell (0, ny/2).
  std::vector<std::size_t> constraint_cells;
  /// LCM: pinned values, V. Empty means 0 for every cell.
  std::vector<double> constraint_values;
  /// DSM: electrode side whose Neumann flux is replaced by Dirichlet phi_ref.
  Side dsm_side = Side::XMin;
  /// DSM Dirichlet value, and GCM post-processing constant C, V.
  double phi_ref = 0.0;
  /// GCM post-processing cell. Unset means (0, ny/2).
  std::optional<std::size_t> x0;

  static ReferenceSpec lcm(double c_e = 0.0);
  static ReferenceSpec dsm(double phi_ref = 0.0);
  static ReferenceSpec gcm(double C = 0.0);
};

struct LineSearchConfig {
  /// Initial trial step. Values <= 0 select 2 J / |grad J|^2, which is the
  /// Newton step on the conservation mismatch.
  double beta0 = 0.0;
  double rho = 0.5;
  double c_armijo = 1e-4;
  double delta_fd = 1e-6;  // V
  FdMode fd_mode = FdMode::Central;
  /// Objective target relative to (j_applied H)^2.
  double outer_tol = 1e-12;
  int outer_max_iter = 100;
  /// Picard iterations per objective evaluation, warm-started from the last
  /// accepted state. 0 runs Picard to convergence every time.
  int picard_iters_per_eval = 0;

  void validate() const;
};

struct SolverConfig {
  Scheme scheme = Scheme::Coupled;
  /// max_i |R_i| / (V_i a) over cell rows, |G| over constraint rows.
  double newton_tol = 1e-6;
  int newton_max_iter = 50;
  /// Relative 2-norm of f^{k+1} - f^k.
  double picard_tol = 1e-8;
  int picard_max_iter = 2000;
  InitStrategy init = InitStrategy::Zeros;
  /// Largest allowed |tau|_inf per Newton step, V. 0 disables the clamp.
  double step_clamp = 0.0;
  LinearSolverConfig linear{};
  /// Singular-system solver used by GCM.
  LinearMethod gcm_method = LinearMethod::Lstr;
  LineSearchConfig linesearch{};

  void validate() const;
};

/// The discrete problem: mesh, conductivities, electrochemistry, operating mode.
struct Problem {
  StructuredGrid grid;
  ConductivityField conductivity;
  PhysicalParams params;
  OperatingMode mode = Galvanostatic{};

  /// Homogeneous conductivities taken from params.
  static Problem homogeneous(const StructuredGrid& grid, const PhysicalParams& params,
                             const OperatingMode& mode);
  /// j_applied for galvanostatic mode, j_sweep for Neumann potentiostatic, 0 otherwise.
  double applied_current_density() const;
  /// Applied current per unit out-of-plane length, j * H (A/m).
  double applied_current() const { return applied_current_density() * grid.height(); }
  /// Boundary conditions implied by the operating mode.
  BoundarySpec boundary() const;
  void validate() const;
};

struct ConservationReport {
  double source_integral = 0.0;      // integral of f over the domain, A/m
  double applied_current = 0.0;      // j H, A/m
  double electrode_mismatch = 0.0;   // |int f - electrode outward flux|
  double electrolyte_mismatch = 0.0; // |int f + electrolyte outward flux|
  double source_balance = 0.0;       // |int f + j H|, galvanostatic check
  bool normalized = false;           // divided by j H (false when j = 0)
  bool flagged = false;              // any entry above 1e-6

  double worst() const;
};

struct SolutionState {
  std::vector<double> phi_e;
  std::vector<double> phi_l;
  std::vector<double> eta;  // recomputed from phi_e, phi_l on return
  std::vector<double> j;    // reaction current density, A/m^2
  std::vector<double> lambda;
  std::vector<double> history;  // Newton residual norms, or Picard f-changes
  int iterations = 0;
  bool converged = false;
  double objective = 0.0;  // (j H + int f)^2
  ConservationReport conservation;
  bool clamped = false;
  bool linear_failure = false;
  int zero_pivots_replaced = 0;
  long linear_iterations = 0;
  // Decoupled scheme only.
  double c_l = 0.0;
  int search_iterations = 0;
  int picard_iterations = 0;
  std::vector<double> objective_trace;
  std::string message;
};

/// Residual and Jacobian at one Newton iterate. Unknowns are ordered
/// [phi_e (N), phi_l (N), lambda (m)].
struct NewtonWorkspace {
  std::vector<double> residual;
  CsrMatrix jacobian;
  std::size_t n_cells = 0;
  std::size_t n_constraints = 0;
  bool clamped = false;
};

/// Fixed operators of one coupled solve.
class CoupledSystem {
 public:
  CoupledSystem(const Problem& problem, const BoundarySpec& boundary,
                std::vector<std::size_t> constraint_cells, std::vector<double> constraint_values);

  /// Galvanostatic system under the given referencing strategy.
  static CoupledSystem galvanostatic(const Problem& problem, const ReferenceSpec& reference);
  /// Potentiostatic system; the boundary already anchors the potentials.
  static CoupledSystem potentiostatic(const Problem& problem);

  std::size_t n_cells() const noexcept { return n_; }
  std::size_t n_constraints() const noexcept { return cells_.size(); }
  std::size_t size() const noexcept { return 2 * n_ + cells_.size(); }

  NewtonWorkspace assemble(std::span<const double> u) const;
  std::vector<double> residual(std::span<const double> u) const;
  /// Volume- and a-scaled infinity norm used as the Newton stopping measure.
  double residual_norm(std::span<const double> r) const;

  const DiscreteOperator& electrode() const noexcept { return op_e_; }
  const DiscreteOperator& electrolyte() const noexcept { return op_l_; }
  const BoundarySpec& boundary() const noexcept { return boundary_; }
  const std::vector<std::size_t>& constraint_cells() const noexcept { return cells_; }

 private:
  std::size_t n_;
  double a_;
  double b_;
  double e_eq_;
  BoundarySpec boundary_;
  DiscreteOperator op_e_;
  DiscreteOperator op_l_;
  std::vector<std::size_t> cells_;
  std::vector<double> values_;
};

/// Builds the coupled system for `reference` and assembles it at `state`.
NewtonWorkspace assemble_residual_jacobian(const SolutionState& state, const Problem& problem,
                                           const ReferenceSpec& reference);

/// Initial potentials per config.init (phi_e = 0; phi_l = 0 or -E_eq).
SolutionState initial_state(const Problem& problem, const SolverConfig& config);

/// Fully coupled Newton on the system. Never throws on non-convergence: the
/// returned state carries converged = false and the history. Throws
/// ConvergenceError when the residual becomes non-finite.
SolutionState newton_solve(const CoupledSystem& system, const Problem& problem,
                           const SolverConfig& config, Strategy strategy,
                           std::optional<SolutionState> start = std::nullopt);

/// Galvanostatic coupled Newton with the given referencing strategy; GCM
/// results are post-processed to phi_e(x0) = phi_ref.
SolutionState newton_coupled(const Problem& problem, const ReferenceSpec& reference,
                             const SolverConfig& config);

/// Decoupled Picard scheme with the electrolyte reference found by reference_search.
SolutionState picard_decoupled(const Problem& problem, const ReferenceSpec& reference,
                               const SolverConfig& config);

/// Dispatch on config.scheme. Throws ConvergenceError when not converged.
SolutionState solve_galvanostatic(const Problem& problem, const ReferenceSpec& reference,
                                  const SolverConfig& config);

/// (j H + int f)^2 after a decoupled solve with electrolyte reference c_l.
double objective_cl(const Problem& problem, double c_l, const ReferenceSpec& reference,
                    const SolverConfig& config);

/// objective_cl on each value; failed points are NaN.
std::vector<double> objective_scan(const Problem& problem, std::span<const double> c_values,
                                   const ReferenceSpec& reference, const SolverConfig& config);

struct SearchResult {
  double c = 0.0;
  double objective = 0.0;
  int iterations = 0;
  int evaluations = 0;
  std::vector<double> trace;  // objective after each accepted step
};

/// Armijo gradient descent on a scalar objective with finite-difference
/// gradients. `accept` (optional) is called with each accepted point. With
/// `refresh_current` the objective at the current point is re-evaluated every
/// iteration, for objectives that change as accepted points are committed.
SearchResult reference_search(const std::function<double(double)>& objective, double c0,
                              double tolerance, const LineSearchConfig& config,
                              const std::function<void(double)>& accept = {},
                              bool refresh_current = false);

/// Shifts both fields by -(phi_e(x0) - C).
void gcm_postprocess(std::vector<double>& phi_e, std::vector<double>& phi_l, std::size_t x0,
                     double C);

/// Conservation diagnostics of a solved state, normalized by j H when j > 0.
ConservationReport conservation_report(const SolutionState& state, const Problem& problem);
ConservationReport conservation_report(const SolutionState& state, const Problem& problem,
                                       const BoundarySpec& boundary);

/// Recomputes eta, j, objective and the conservation report from the potentials.
void refresh_derived(SolutionState& state, const Problem& problem, const BoundarySpec& boundary);

struct SweepPoint {
  double value = 0.0;
  bool ok = false;
  /// Current entering through the electrode collector x = 0, per unit
  /// length (A/m); positive for reduction.
  double total_current = 0.0;
  double mean_eta = 0.0;
  SolutionState state;
  std::string message;
};

/// One coupled solve per V_sweep with Dirichlet data on both collectors.
std::vector<SweepPoint> potentiostatic_dirichlet_sweep(const Problem& problem,
                                                       std::span<const double> v_values,
                                                       const SolverConfig& config);

/// One coupled solve per j_sweep with electrode Dirichlet V_applied at x = 0.
std::vector<SweepPoint> potentiostatic_neumann_sweep(const Problem& problem,
                                                     std::span<const double> j_values,
                                                     const SolverConfig& config);

}  // namespace porelec
