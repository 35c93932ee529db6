#pragma once

#include <optional>
#include <span>
#include <vector>

#include "porelec/model.hpp"

namespace porelec {

/// 1D reduction eta'' = c' sinh(b eta) on [0, W] with eta'(0) = q1, eta'(W) = q2.
struct ExactProblem {
  double a = 0.0;      // A/m^3
  double b = 0.0;      // 1/V
  double sigma = 0.0;  // S/m
  double kappa = 0.0;  // S/m
  double W = 0.0;      // m
  double q1 = 0.0;     // V/m
  double q2 = 0.0;     // V/m
  double E_eq = 0.0;   // V
  double j_applied = 0.0;  // A/m^2, used by the potential reconstruction

  double c_prime() const noexcept { return a / sigma + a / kappa; }

  /// q1 = j / sigma, q2 = -j / kappa.
  static ExactProblem galvanostatic(const PhysicalParams& params, double sigma, double kappa,
                                    double W, double j_applied);
  /// Electrolyte current prescribed at x = W through q2; q1 = -(kappa / sigma) q2.
  static ExactProblem current_driven(const PhysicalParams& params, double sigma, double kappa,
                                     double W, double q2);
  void validate() const;
};

struct ShootingOptions {
  int ode_steps = 10000;
  double tol = 1e-10;  // on |eta'(W) - q2| (or |eta(W) - target| for shoot_slope)
  int max_iter = 200;
  std::optional<double> seed;  // starting guess for the unknown initial value
};

struct ShootingResult {
  double eta0 = 0.0;
  double q1 = 0.0;
  std::vector<double> x;
  std::vector<double> eta;
  std::vector<double> deta;
  /// 0.5 eta'^2 - (c'/b) cosh(b eta) at x = 0.
  double first_integral = 0.0;
  /// max over the trajectory of |first integral - first_integral|.
  double first_integral_drift = 0.0;
  double residual = 0.0;  // final boundary mismatch
  int iterations = 0;     // secant updates after bracketing
  int evaluations = 0;
};

/// Finds eta(0) such that eta'(W) = q2 (fixed-step RK4 plus safeguarded secant).
/// Throws ConvergenceError with bracket diagnostics on failure.
ShootingResult shoot_eta0(const ExactProblem& problem, const ShootingOptions& options = {});

/// Finds eta'(0) such that eta(0) = eta0 and eta(W) = eta_w. The q fields of
/// `problem` are ignored.
ShootingResult shoot_slope(const ExactProblem& problem, double eta0, double eta_w,
                           const ShootingOptions& options = {});

/// Hermite interpolation of the trajectory at xs. Throws ParameterError for
/// points outside [0, W].
std::vector<double> eta_profile(const ShootingResult& result, std::span<const double> xs);

struct Potentials1D {
  std::vector<double> x;
  std::vector<double> phi_e;
  std::vector<double> phi_l;
  std::vector<double> dphi_e;
  std::vector<double> dphi_l;
};

/// Integrates sigma phi_e'' = a sinh(b eta) with phi_e(0) = phi_e0 and
/// sigma phi_e'(0) = j_applied, then phi_l = phi_e - eta - E_eq. Sampled at xs
/// (trajectory nodes when xs is empty).
Potentials1D reconstruct_1d_potentials(const ShootingResult& result, const ExactProblem& problem,
                                       double phi_e0, std::span<const double> xs = {});

}  // namespace porelec
