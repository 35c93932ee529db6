#include "porelec/convergence.hpp"

#include <cmath>
#include <limits>

#include "porelec/errors.hpp"

namespace porelec {

EtaErrors eta_errors(std::span<const double> eta, std::span<const double> exact, double dx,
                     double dy) {
  if (eta.size() != exact.size() || eta.empty()) {
    throw ParameterError("eta_errors: length mismatch");
  }
  double l2 = 0.0;
  double grad = 0.0;
  for (std::size_t i = 0; i < eta.size(); ++i) {
    const double e = eta[i] - exact[i];
    l2 += e * e * dx * dy;
    if (i + 1 < eta.size()) {
      const double d = ((eta[i + 1] - exact[i + 1]) - e) / dx;
      grad += d * d * dx * dy;
    }
  }
  return {std::sqrt(l2), std::sqrt(l2 + grad)};
}

std::vector<ConvergenceRow> convergence_study(const ConvergenceSetup& setup,
                                              std::span<const std::size_t> nx_values) {
  const double sigma = setup.params.sigma_ref();
  const double kappa = setup.params.kappa_ref();
  const ExactProblem exact =
      ExactProblem::galvanostatic(setup.params, sigma, kappa, setup.W, setup.j_applied);
  const ShootingResult shot = shoot_eta0(exact, setup.shooting);

  std::vector<ConvergenceRow> rows;
  for (std::size_t nx : nx_values) {
    const StructuredGrid grid(nx, 1, setup.W, setup.H, setup.L);
    const Problem problem =
        Problem::homogeneous(grid, setup.params, Galvanostatic{setup.j_applied});
    const SolutionState state = solve_galvanostatic(problem, setup.reference, setup.solver);
    std::vector<double> xs(nx);
    for (std::size_t i = 0; i < nx; ++i) xs[i] = grid.x_center(i);
    const std::vector<double> ref = eta_profile(shot, xs);
    const EtaErrors err = eta_errors(state.eta, ref, grid.dx(), grid.dy());

    ConvergenceRow row;
    row.nx = nx;
    row.l2_error = err.l2;
    row.h1_error = err.h1;
    row.l2_slope = std::numeric_limits<double>::quiet_NaN();
    row.h1_slope = std::numeric_limits<double>::quiet_NaN();
    if (!rows.empty()) {
      const ConvergenceRow& prev = rows.back();
      const double ratio = std::log(static_cast<double>(nx) / static_cast<double>(prev.nx));
      row.l2_slope = std::log(prev.l2_error / row.l2_error) / ratio;
      row.h1_slope = std::log(prev.h1_error / row.h1_error) / ratio;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace porelec
