#include <algorithm>
#include <cmath>
#include <string>

#include "porelec/errors.hpp"
#include "porelec/nonlinear.hpp"

namespace porelec {

namespace {

std::size_t default_reference_cell(const StructuredGrid& grid) {
  return grid.index(0, grid.ny() / 2);
}

void append_block(std::vector<Triplet>& out, const CsrMatrix& m, std::size_t row0,
                  std::size_t col0) {
  const auto rp = m.row_offsets();
  const auto ci = m.col_indices();
  const auto va = m.values();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t k = rp[r]; k < rp[r + 1]; ++k) out.push_back({row0 + r, col0 + ci[k], va[k]});
  }
}

}  // namespace

ReferenceSpec ReferenceSpec::lcm(double c_e) {
  ReferenceSpec r;
  r.strategy = Strategy::Lcm;
  r.constraint_values = {c_e};
  return r;
}

ReferenceSpec ReferenceSpec::dsm(double phi_ref) {
  ReferenceSpec r;
  r.strategy = Strategy::Dsm;
  r.phi_ref = phi_ref;
  return r;
}

ReferenceSpec ReferenceSpec::gcm(double C) {
  ReferenceSpec r;
  r.strategy = Strategy::Gcm;
  r.phi_ref = C;
  return r;
}

void LineSearchConfig::validate() const {
  if (!(rho > 0.0 && rho < 1.0)) throw ParameterError("line search rho must lie in (0, 1)");
  if (!(c_armijo > 0.0 && c_armijo < 1.0)) throw ParameterError("c_armijo must lie in (0, 1)");
  if (!(delta_fd > 0.0)) throw ParameterError("delta_fd must be positive");
  if (!(outer_tol > 0.0)) throw ParameterError("outer_tol must be positive");
  if (outer_max_iter < 0) throw ParameterError("outer_max_iter must be non-negative");
  if (picard_iters_per_eval < 0) throw ParameterError("picard_iters_per_eval must be >= 0");
}

void SolverConfig::validate() const {
  if (!(newton_tol > 0.0)) throw ParameterError("newton_tol must be positive");
  if (!(picard_tol > 0.0)) throw ParameterError("picard_tol must be positive");
  if (newton_max_iter < 0 || picard_max_iter < 1) throw ParameterError("iteration caps too small");
  if (step_clamp < 0.0) throw ParameterError("step_clamp must be non-negative");
  linear.validate();
  linesearch.validate();
}

Problem Problem::homogeneous(const StructuredGrid& grid, const PhysicalParams& params,
                             const OperatingMode& mode) {
  return {grid, ConductivityField::homogeneous(grid, params.sigma_ref(), params.kappa_ref()),
          params, mode};
}

double Problem::applied_current_density() const {
  if (const auto* g = std::get_if<Galvanostatic>(&mode)) return g->j_applied;
  if (const auto* n = std::get_if<PotentiostaticNeumann>(&mode)) return n->j_sweep;
  return 0.0;
}

BoundarySpec Problem::boundary() const {
  if (const auto* g = std::get_if<Galvanostatic>(&mode)) {
    return BoundarySpec::galvanostatic(g->j_applied);
  }
  BoundarySpec spec;
  if (const auto* d = std::get_if<PotentiostaticDirichlet>(&mode)) {
    spec.electrode[Side::XMin] = BoundaryCondition::dirichlet(d->V_applied);
    spec.electrolyte[Side::XMax] = BoundaryCondition::dirichlet(d->V_sweep);
  } else if (const auto* n = std::get_if<PotentiostaticNeumann>(&mode)) {
    spec.electrode[Side::XMin] = BoundaryCondition::dirichlet(n->V_applied);
    spec.electrolyte[Side::XMax] = BoundaryCondition::neumann(n->j_sweep);
  }
  return spec;
}

void Problem::validate() const {
  conductivity.validate(grid);
  validate_mode(mode);
}

double ConservationReport::worst() const {
  return std::max({electrode_mismatch, electrolyte_mismatch, source_balance});
}

CoupledSystem::CoupledSystem(const Problem& problem, const BoundarySpec& boundary,
                             std::vector<std::size_t> constraint_cells,
                             std::vector<double> constraint_values)
    : n_(problem.grid.size()),
      a_(problem.params.a()),
      b_(problem.params.b()),
      e_eq_(problem.params.E_eq()),
      boundary_(boundary),
      op_e_(assemble_diffusion(problem.grid, problem.conductivity.sigma, boundary.electrode)),
      op_l_(assemble_diffusion(problem.grid, problem.conductivity.kappa, boundary.electrolyte)),
      cells_(std::move(constraint_cells)),
      values_(std::move(constraint_values)) {
  if (cells_.size() != values_.size()) {
    throw ParameterError("constraint cells and values differ in length");
  }
  for (std::size_t c : cells_) {
    if (c >= n_) throw ParameterError("constraint cell outside the grid");
  }
}

CoupledSystem CoupledSystem::galvanostatic(const Problem& problem, const ReferenceSpec& reference) {
  if (!std::holds_alternative<Galvanostatic>(problem.mode)) {
    throw ParameterError("galvanostatic system requested for a potentiostatic problem");
  }
  problem.validate();
  BoundarySpec boundary = problem.boundary();
  switch (reference.strategy) {
    case Strategy::Lcm: {
      std::vector<std::size_t> cells = reference.constraint_cells;
      if (cells.empty()) cells.push_back(default_reference_cell(problem.grid));
      std::vector<double> values = reference.constraint_values;
      if (values.empty()) values.assign(cells.size(), 0.0);
      if (values.size() == 1 && cells.size() > 1) values.assign(cells.size(), values.front());
      return CoupledSystem(problem, boundary, std::move(cells), std::move(values));
    }
    case Strategy::Dsm:
      if (boundary.electrode[reference.dsm_side].is_dirichlet()) {
        throw ParameterError("DSM side already carries Dirichlet data");
      }
      boundary.electrode[reference.dsm_side] = BoundaryCondition::dirichlet(reference.phi_ref);
      return CoupledSystem(problem, boundary, {}, {});
    case Strategy::Gcm:
      return CoupledSystem(problem, boundary, {}, {});
  }
  throw ParameterError("unknown referencing strategy");
}

CoupledSystem CoupledSystem::potentiostatic(const Problem& problem) {
  if (std::holds_alternative<Galvanostatic>(problem.mode)) {
    throw ParameterError("potentiostatic system requested for a galvanostatic problem");
  }
  problem.validate();
  return CoupledSystem(problem, problem.boundary(), {}, {});
}

std::vector<double> CoupledSystem::residual(std::span<const double> u) const {
  if (u.size() != size()) throw ParameterError("state vector has the wrong length");
  const auto phi_e = u.subspan(0, n_);
  const auto phi_l = u.subspan(n_, n_);
  std::vector<double> r(size(), 0.0);
  const std::span<double> qe(r.data(), n_);
  const std::span<double> ql(r.data() + n_, n_);
  op_e_.A.multiply(phi_e, qe);
  op_l_.A.multiply(phi_l, ql);
  for (std::size_t i = 0; i < n_; ++i) {
    const double fv = bv_source(overpotential(phi_e[i], phi_l[i], e_eq_), a_, b_) *
                      op_e_.cell_volumes[i];
    qe[i] += fv - op_e_.b_bc[i];
    ql[i] += -fv - op_l_.b_bc[i];
  }
  for (std::size_t k = 0; k < cells_.size(); ++k) {
    qe[cells_[k]] += u[2 * n_ + k];
    r[2 * n_ + k] = phi_e[cells_[k]] - values_[k];
  }
  return r;
}

NewtonWorkspace CoupledSystem::assemble(std::span<const double> u) const {
  NewtonWorkspace ws;
  ws.n_cells = n_;
  ws.n_constraints = cells_.size();
  ws.residual = residual(u);

  std::vector<Triplet> t;
  t.reserve(2 * (op_e_.A.nonzeros() + n_) + 2 * cells_.size() + 2 * n_);
  append_block(t, op_e_.A, 0, 0);
  append_block(t, op_l_.A, n_, n_);
  for (std::size_t i = 0; i < n_; ++i) {
    const SourceEval s = evaluate_source(overpotential(u[i], u[n_ + i], e_eq_), a_, b_);
    ws.clamped = ws.clamped || s.clamped;
    const double d = s.derivative * op_e_.cell_volumes[i];
    t.push_back({i, i, d});
    t.push_back({i, n_ + i, -d});
    t.push_back({n_ + i, i, -d});
    t.push_back({n_ + i, n_ + i, d});
  }
  for (std::size_t k = 0; k < cells_.size(); ++k) {
    t.push_back({cells_[k], 2 * n_ + k, 1.0});
    t.push_back({2 * n_ + k, cells_[k], 1.0});
  }
  ws.jacobian = CsrMatrix(size(), size(), std::move(t));
  return ws;
}

double CoupledSystem::residual_norm(std::span<const double> r) const {
  double m = 0.0;
  for (std::size_t i = 0; i < 2 * n_; ++i) {
    m = std::max(m, std::abs(r[i]) / (op_e_.cell_volumes[i % n_] * a_));
  }
  for (std::size_t k = 2 * n_; k < r.size(); ++k) m = std::max(m, std::abs(r[k]));
  return m;
}

NewtonWorkspace assemble_residual_jacobian(const SolutionState& state, const Problem& problem,
                                           const ReferenceSpec& reference) {
  const CoupledSystem system = CoupledSystem::galvanostatic(problem, reference);
  const std::size_t n = problem.grid.size();
  if (state.phi_e.size() != n || state.phi_l.size() != n) {
    throw ParameterError("state fields do not match the grid");
  }
  std::vector<double> u(system.size(), 0.0);
  std::copy(state.phi_e.begin(), state.phi_e.end(), u.begin());
  std::copy(state.phi_l.begin(), state.phi_l.end(), u.begin() + static_cast<std::ptrdiff_t>(n));
  for (std::size_t k = 0; k < system.n_constraints() && k < state.lambda.size(); ++k) {
    u[2 * n + k] = state.lambda[k];
  }
  for (double v : u) {
    if (!std::isfinite(v)) throw ParameterError("state contains non-finite values");
  }
  return system.assemble(u);
}

}  // namespace porelec
