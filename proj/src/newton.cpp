#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "porelec/errors.hpp"
#include "porelec/nonlinear.hpp"

namespace porelec {

namespace {

void remove_mean(std::vector<double>& v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  for (double& x : v) x -= mean;
}

double outward_flux(const DomainBoundary& boundary, std::span<const double> field,
                    std::span<const double> conductivity, const StructuredGrid& grid) {
  double total = 0.0;
  for (Side side : kAllSides) {
    const BoundaryCondition& bc = boundary[side];
    total += bc.is_dirichlet()
                 ? reconstruct_boundary_flux(field, conductivity, grid, side, bc.value)
                 : bc.value * grid.side_length(side);
  }
  return total;
}

std::size_t default_x0(const StructuredGrid& grid) { return grid.index(0, grid.ny() / 2); }

}  // namespace

SolutionState initial_state(const Problem& problem, const SolverConfig& config) {
  const std::size_t n = problem.grid.size();
  SolutionState s;
  s.phi_e.assign(n, 0.0);
  s.phi_l.assign(n, config.init == InitStrategy::PhiLEqMinusEeq ? -problem.params.E_eq() : 0.0);
  return s;
}

void refresh_derived(SolutionState& state, const Problem& problem, const BoundarySpec& boundary) {
  const std::size_t n = problem.grid.size();
  const double a = problem.params.a();
  const double b = problem.params.b();
  state.eta.resize(n);
  state.j.resize(n);
  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i) {
    state.eta[i] = overpotential(state.phi_e[i], state.phi_l[i], problem.params.E_eq());
    state.j[i] = reaction_current(state.eta[i], problem.params.j0(), b);
    f[i] = bv_source(state.eta[i], a, b);
  }
  const double mismatch = integrate_cells(f, problem.grid) + problem.applied_current();
  state.objective = mismatch * mismatch;
  state.conservation = conservation_report(state, problem, boundary);
}

ConservationReport conservation_report(const SolutionState& state, const Problem& problem) {
  return conservation_report(state, problem, problem.boundary());
}

ConservationReport conservation_report(const SolutionState& state, const Problem& problem,
                                       const BoundarySpec& boundary) {
  const StructuredGrid& grid = problem.grid;
  const std::size_t n = grid.size();
  if (state.phi_e.size() != n || state.phi_l.size() != n) {
    throw ParameterError("state fields do not match the grid");
  }
  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i) {
    f[i] = bv_source(overpotential(state.phi_e[i], state.phi_l[i], problem.params.E_eq()),
                     problem.params.a(), problem.params.b());
  }
  ConservationReport rep;
  rep.source_integral = integrate_cells(f, grid);
  rep.applied_current = problem.applied_current();
  const double flux_e =
      outward_flux(boundary.electrode, state.phi_e, problem.conductivity.sigma, grid);
  const double flux_l =
      outward_flux(boundary.electrolyte, state.phi_l, problem.conductivity.kappa, grid);
  rep.electrode_mismatch = std::abs(rep.source_integral - flux_e);
  rep.electrolyte_mismatch = std::abs(rep.source_integral + flux_l);
  const bool current_driven = !std::holds_alternative<PotentiostaticDirichlet>(problem.mode);
  rep.source_balance = current_driven ? std::abs(rep.source_integral + rep.applied_current) : 0.0;

  double scale = 1.0;
  if (rep.applied_current > 0.0) {
    scale = rep.applied_current;
  } else if (!current_driven && std::abs(flux_e) > 0.0) {
    scale = std::abs(flux_e);
  }
  rep.normalized = scale != 1.0;
  rep.electrode_mismatch /= scale;
  rep.electrolyte_mismatch /= scale;
  rep.source_balance /= scale;
  rep.flagged = rep.worst() > 1e-6;
  return rep;
}

void gcm_postprocess(std::vector<double>& phi_e, std::vector<double>& phi_l, std::size_t x0,
                     double C) {
  if (x0 >= phi_e.size() || phi_l.size() != phi_e.size()) {
    throw ParameterError("gcm_postprocess: x0 out of range");
  }
  const double shift = phi_e[x0] - C;
  for (double& v : phi_e) v -= shift;
  for (double& v : phi_l) v -= shift;
}

SolutionState newton_solve(const CoupledSystem& system, const Problem& problem,
                           const SolverConfig& config, Strategy strategy,
                           std::optional<SolutionState> start) {
  config.validate();
  const std::size_t n = system.n_cells();
  const std::size_t m = system.n_constraints();
  SolutionState state = start ? std::move(*start) : initial_state(problem, config);
  if (state.phi_e.size() != n || state.phi_l.size() != n) {
    throw ParameterError("initial state does not match the grid");
  }

  std::vector<double> u(system.size(), 0.0);
  std::copy(state.phi_e.begin(), state.phi_e.end(), u.begin());
  std::copy(state.phi_l.begin(), state.phi_l.end(), u.begin() + static_cast<std::ptrdiff_t>(n));
  for (std::size_t k = 0; k < m && k < state.lambda.size(); ++k) u[2 * n + k] = state.lambda[k];

  state.history.clear();
  state.iterations = 0;
  state.converged = false;
  for (int it = 0;; ++it) {
    NewtonWorkspace ws = system.assemble(u);
    state.clamped = state.clamped || ws.clamped;
    const double norm = system.residual_norm(ws.residual);
    if (!std::isfinite(norm)) {
      throw ConvergenceError(
          "Newton residual became non-finite; try init = zeros or init = phi_l_eq, or a step "
          "clamp",
          state.history);
    }
    state.history.push_back(norm);
    if (norm <= config.newton_tol) {
      state.converged = true;
      break;
    }
    if (it >= config.newton_max_iter) break;

    std::vector<double> rhs(ws.residual.size());
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = -ws.residual[i];

    SolveReport rep;
    std::vector<double> tau;
    if (strategy == Strategy::Gcm && m == 0) {
      LinearSolverConfig lc = config.linear;
      lc.method = config.gcm_method;
      // The null vector is all ones; round-off leaves a small component of it
      // in the residual, which MINRES turns into a growing null-space drift.
      remove_mean(rhs);
      rep = solve_linear(ws.jacobian, rhs, lc);
      tau = std::move(rep.x);
      remove_mean(tau);
    } else if (m > 0) {
      const ScaledSaddle scaled = rescale_saddle(ws.jacobian, 2 * n);
      rep = solve_linear(scaled.matrix, scaled.scale_rhs(rhs), config.linear);
      tau = scaled.unscale_solution(rep.x);
    } else {
      rep = solve_linear(ws.jacobian, rhs, config.linear);
      tau = std::move(rep.x);
    }
    state.linear_iterations += rep.iterations;
    state.zero_pivots_replaced += rep.zero_pivots_replaced;
    if (!rep.converged) state.linear_failure = true;

    if (config.step_clamp > 0.0) {
      const double big = norm_inf(std::span<const double>(tau.data(), 2 * n));
      if (big > config.step_clamp) {
        const double s = config.step_clamp / big;
        for (double& v : tau) v *= s;
      }
    }
    for (std::size_t i = 0; i < u.size(); ++i) u[i] += tau[i];
    state.iterations = it + 1;
  }

  state.phi_e.assign(u.begin(), u.begin() + static_cast<std::ptrdiff_t>(n));
  state.phi_l.assign(u.begin() + static_cast<std::ptrdiff_t>(n),
                     u.begin() + static_cast<std::ptrdiff_t>(2 * n));
  state.lambda.assign(u.begin() + static_cast<std::ptrdiff_t>(2 * n), u.end());
  state.message = state.converged ? "newton converged" : "newton hit iteration cap";
  refresh_derived(state, problem, system.boundary());
  return state;
}

SolutionState newton_coupled(const Problem& problem, const ReferenceSpec& reference,
                             const SolverConfig& config) {
  const CoupledSystem system = CoupledSystem::galvanostatic(problem, reference);
  SolutionState state = newton_solve(system, problem, config, reference.strategy);
  if (reference.strategy == Strategy::Gcm) {
    const std::size_t x0 = reference.x0.value_or(default_x0(problem.grid));
    gcm_postprocess(state.phi_e, state.phi_l, x0, reference.phi_ref);
    refresh_derived(state, problem, system.boundary());
  }
  return state;
}

SolutionState solve_galvanostatic(const Problem& problem, const ReferenceSpec& reference,
                                  const SolverConfig& config) {
  SolutionState state = config.scheme == Scheme::Coupled
                            ? newton_coupled(problem, reference, config)
                            : picard_decoupled(problem, reference, config);
  if (!state.converged) {
    throw ConvergenceError("galvanostatic solve did not converge: " + state.message,
                           state.history);
  }
  return state;
}

}  // namespace porelec
