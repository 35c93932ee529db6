#pragma once

#include <span>
#include <vector>

#include "porelec/exact1d.hpp"
#include "porelec/nonlinear.hpp"

namespace porelec {

struct ConvergenceRow {
  std::size_t nx = 0;
  double l2_error = 0.0;
  double h1_error = 0.0;
  double l2_slope = 0.0;  // NaN on the first row
  double h1_slope = 0.0;
};

struct ConvergenceSetup {
  PhysicalParams params{};
  double W = 5e-3;
  double H = 0.1;
  double L = 0.1;
  double j_applied = 500.0;
  ReferenceSpec reference = ReferenceSpec::lcm();
  SolverConfig solver{};
  ShootingOptions shooting{};
};

/// Cell-volume-weighted errors of a cell-centred eta against exact values at
/// the same centres. H1 adds the error of the x difference quotients.
struct EtaErrors {
  double l2 = 0.0;
  double h1 = 0.0;
};
EtaErrors eta_errors(std::span<const double> eta, std::span<const double> exact, double dx,
                     double dy);

/// Galvanostatic solves on nx x 1 grids compared with the shooting oracle.
/// Slopes are log(e_i / e_{i+1}) / log(nx_{i+1} / nx_i).
std::vector<ConvergenceRow> convergence_study(const ConvergenceSetup& setup,
                                              std::span<const std::size_t> nx_values);

}  // namespace porelec
