#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "porelec/sparse.hpp"

namespace porelec {

enum class LinearMethod { BicgstabIlu, MinimumResidual, Lstr, Pseudoinverse };

struct LinearSolverConfig {
  LinearMethod method = LinearMethod::BicgstabIlu;
  double tol = 1e-10;                  // relative residual ||Ax - b|| / ||b||
  int max_iter = 5000;
  double ilu_drop_replacement = 1e-3;  // substituted for zero pivots of U
  double lambda_T = 1e-8;              // Tikhonov damping for lstr
  double lambda_shift = 0.0;           // Schur shift for the minimum-residual path
  std::size_t dense_cap = 2000;        // largest system handed to the dense SVD
  int gmres_restart = 0;               // 0 = unrestarted
  bool lstr_ilu = true;                // right ILU(0) preconditioning inside lstr

  void validate() const;
};

struct SolveReport {
  std::vector<double> x;
  int iterations = 0;
  /// ||A x - b|| / ||b|| recomputed from x (absolute ||A x|| when b = 0).
  double residual = 0.0;
  bool converged = false;
  bool stagnated = false;
  int zero_pivots_replaced = 0;
  std::string message;
};

/// ILU(0) on the sparsity pattern of A (diagonal added where missing). Zero
/// pivots of U are replaced by `drop_replacement` and counted.
class Ilu0 {
 public:
  Ilu0(const CsrMatrix& a, double drop_replacement);

  void solve(std::span<const double> rhs, std::span<double> out) const;
  /// Solves (LU)^T out = rhs.
  void solve_transpose(std::span<const double> rhs, std::span<double> out) const;
  int zero_pivots_replaced() const noexcept { return replaced_; }

 private:
  std::size_t n_;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::size_t> col_idx_;
  std::vector<std::size_t> diag_pos_;
  std::vector<double> lu_;
  int replaced_ = 0;
};

/// Right-preconditioned BiCGSTAB with ILU(0). Reports failure (with the best
/// iterate) instead of throwing when the tolerance is not met.
SolveReport bicgstab_ilu(const CsrMatrix& a, std::span<const double> b,
                         const LinearSolverConfig& config);

/// Minimum-residual Krylov solve. Uses MINRES when the operator is symmetric and
/// GMRES otherwise. Suitable for singular consistent systems.
SolveReport minimum_residual_solve(const LinearOperator& a, std::span<const double> b,
                                   const LinearSolverConfig& config);

/// Damped least squares, argmin ||Ax - b||^2 + lambda_T^2 ||x||^2, by LSMR.
SolveReport lstr_solve(const LinearOperator& a, std::span<const double> b, double lambda_T,
                       const LinearSolverConfig& config);

/// Minimum-norm least-squares solution by dense SVD. Singular values below
/// eps * max(sigma) * n are treated as zero. Throws ParameterError above `dense_cap`.
std::vector<double> pseudoinverse_solve(const CsrMatrix& a, std::span<const double> b,
                                        std::size_t dense_cap = 2000);

/// The operator A - lambda_shift^2 I, applied implicitly.
LinearOperator schur_shifted(const LinearOperator& a, double lambda_shift);

/// Symmetric rescaling of a Lagrange-extended system: constraint rows and
/// columns (indices >= n_primary) are multiplied by gamma = mean |diag| of the
/// primary block.
struct ScaledSaddle {
  CsrMatrix matrix;
  double gamma = 1.0;
  std::size_t n_primary = 0;
  bool fell_back = false;  // zero primary diagonal, gamma forced to 1
  std::string warning;

  std::vector<double> scale_rhs(std::span<const double> rhs) const;
  std::vector<double> unscale_solution(std::span<const double> y) const;
};

ScaledSaddle rescale_saddle(const CsrMatrix& extended, std::size_t n_primary);

/// Dispatch on config.method.
SolveReport solve_linear(const CsrMatrix& a, std::span<const double> b,
                         const LinearSolverConfig& config);

/// ||A x - b|| / ||b||, or ||A x|| when b = 0.
double relative_residual(const LinearOperator& a, std::span<const double> x,
                         std::span<const double> b);

}  // namespace porelec
