#include <numeric>
#include <string>

#include "porelec/errors.hpp"
#include "porelec/nonlinear.hpp"

namespace porelec {

namespace {

SweepPoint solve_point(const Problem& problem, double value, const SolverConfig& config) {
  SweepPoint p;
  p.value = value;
  try {
    const CoupledSystem system = CoupledSystem::potentiostatic(problem);
    p.state = newton_solve(system, problem, config, Strategy::Dsm);
    const BoundaryCondition& bc = system.boundary().electrode[Side::XMin];
    p.total_current = -reconstruct_boundary_flux(p.state.phi_e, problem.conductivity.sigma,
                                                 problem.grid, Side::XMin, bc.value);
    p.mean_eta = std::accumulate(p.state.eta.begin(), p.state.eta.end(), 0.0) /
                 static_cast<double>(p.state.eta.size());
    p.ok = p.state.converged;
    p.message = p.state.message;
  } catch (const std::exception& e) {
    p.ok = false;
    p.message = e.what();
  }
  return p;
}

}  // namespace

std::vector<SweepPoint> potentiostatic_dirichlet_sweep(const Problem& problem,
                                                       std::span<const double> v_values,
                                                       const SolverConfig& config) {
  const auto* mode = std::get_if<PotentiostaticDirichlet>(&problem.mode);
  if (!mode) throw ParameterError("Dirichlet sweep needs a potentiostatic Dirichlet problem");
  std::vector<SweepPoint> out;
  out.reserve(v_values.size());
  for (double v : v_values) {
    Problem point = problem;
    point.mode = PotentiostaticDirichlet{mode->V_applied, v};
    out.push_back(solve_point(point, v, config));
  }
  return out;
}

std::vector<SweepPoint> potentiostatic_neumann_sweep(const Problem& problem,
                                                     std::span<const double> j_values,
                                                     const SolverConfig& config) {
  const auto* mode = std::get_if<PotentiostaticNeumann>(&problem.mode);
  if (!mode) throw ParameterError("Neumann sweep needs a potentiostatic Neumann problem");
  for (double j : j_values) {
    if (!(j >= 0.0)) throw ParameterError("j_sweep values must be non-negative");
  }
  std::vector<SweepPoint> out;
  out.reserve(j_values.size());
  for (double j : j_values) {
    Problem point = problem;
    point.mode = PotentiostaticNeumann{mode->V_applied, j};
    out.push_back(solve_point(point, j, config));
  }
  return out;
}

}  // namespace porelec
