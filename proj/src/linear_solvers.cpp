#include "porelec/linear_solvers.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "porelec/errors.hpp"

namespace porelec {

namespace {

constexpr double kTiny = std::numeric_limits<double>::min();
constexpr double kEps = std::numeric_limits<double>::epsilon();

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

void check_square(std::size_t rows, std::size_t cols, std::size_t nb, const char* who) {
  if (rows != cols || nb != rows) {
    throw ParameterError(std::string(who) + ": dimension mismatch");
  }
}

SolveReport zero_rhs_report(std::size_t n) {
  SolveReport r;
  r.x.assign(n, 0.0);
  r.converged = true;
  r.message = "zero right-hand side";
  return r;
}

// Stable Givens rotation: returns (c, s, r) with [c s; -s c] [a; b] = [r; 0].
struct Rotation {
  double c;
  double s;
  double r;
};

Rotation sym_ortho(double a, double b) {
  if (b == 0.0) return {a == 0.0 ? 1.0 : std::copysign(1.0, a), 0.0, std::abs(a)};
  if (a == 0.0) return {0.0, std::copysign(1.0, b), std::abs(b)};
  if (std::abs(b) > std::abs(a)) {
    const double tau = a / b;
    const double s = std::copysign(1.0, b) / std::sqrt(1.0 + tau * tau);
    return {s * tau, s, b / s};
  }
  const double tau = b / a;
  const double c = std::copysign(1.0, a) / std::sqrt(1.0 + tau * tau);
  return {c, c * tau, a / c};
}

SolveReport minres(const LinearOperator& a, std::span<const double> b,
                   const LinearSolverConfig& cfg) {
  const std::size_t n = b.size();
  const double bnorm = norm2(b);
  SolveReport rep;
  rep.x.assign(n, 0.0);

  std::vector<double> r1(b.begin(), b.end());
  std::vector<double> r2 = r1;
  std::vector<double> y = r1;
  std::vector<double> v(n), w(n, 0.0), w1(n, 0.0), w2(n, 0.0);

  double beta = bnorm;
  double oldb = 0.0;
  double dbar = 0.0;
  double epsln = 0.0;
  double phibar = bnorm;
  double cs = -1.0;
  double sn = 0.0;
  double best_window = phibar;
  const double target = cfg.tol * bnorm;

  for (int itn = 1; itn <= cfg.max_iter; ++itn) {
    const double s = 1.0 / beta;
    for (std::size_t i = 0; i < n; ++i) v[i] = s * y[i];
    a.apply(v, y);
    if (itn >= 2) axpy(-beta / oldb, r1, y);
    const double alfa = dot(v, y);
    axpy(-alfa / beta, r2, y);
    r1.swap(r2);
    r2 = y;
    oldb = beta;
    beta = norm2(y);

    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    const double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    const double gamma = std::max(std::hypot(gbar, beta), kEps);
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar = sn * phibar;

    w1.swap(w2);
    w2.swap(w);
    for (std::size_t i = 0; i < n; ++i) w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) / gamma;
    axpy(phi, w, rep.x);
    rep.iterations = itn;

    if (phibar <= target) {
      rep.converged = true;
      break;
    }
    if (beta <= kTiny) break;  // Krylov space exhausted
    if (itn % 200 == 0) {
      if (phibar > 0.999 * best_window) {
        rep.stagnated = true;
        break;
      }
      best_window = phibar;
    }
  }
  rep.residual = relative_residual(a, rep.x, b);
  if (!rep.converged && rep.residual <= cfg.tol) rep.converged = true;
  rep.message = rep.converged ? "minres converged"
                              : (rep.stagnated ? "minres stagnated" : "minres hit iteration cap");
  return rep;
}

SolveReport gmres(const LinearOperator& a, std::span<const double> b,
                  const LinearSolverConfig& cfg) {
  const std::size_t n = b.size();
  const double bnorm = norm2(b);
  const int restart = cfg.gmres_restart > 0 ? cfg.gmres_restart : cfg.max_iter;
  SolveReport rep;
  rep.x.assign(n, 0.0);
  std::vector<double> r(n), tmp(n);
  int total = 0;

  while (total < cfg.max_iter) {
    a.apply(rep.x, tmp);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - tmp[i];
    const double rnorm = norm2(r);
    if (rnorm <= cfg.tol * bnorm) {
      rep.converged = true;
      break;
    }
    const int m = std::min(restart, cfg.max_iter - total);
    std::vector<std::vector<double>> basis;
    basis.reserve(static_cast<std::size_t>(m) + 1);
    basis.emplace_back(n);
    for (std::size_t i = 0; i < n; ++i) basis[0][i] = r[i] / rnorm;
    std::vector<std::vector<double>> h(static_cast<std::size_t>(m) + 1,
                                       std::vector<double>(static_cast<std::size_t>(m), 0.0));
    std::vector<double> cs(static_cast<std::size_t>(m)), sn(static_cast<std::size_t>(m));
    std::vector<double> g(static_cast<std::size_t>(m) + 1, 0.0);
    g[0] = rnorm;
    int k = 0;
    bool done = false;
    for (; k < m; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      std::vector<double> wv(n);
      a.apply(basis[ku], wv);
      for (std::size_t j = 0; j <= ku; ++j) {
        h[j][ku] = dot(wv, basis[j]);
        axpy(-h[j][ku], basis[j], wv);
      }
      h[ku + 1][ku] = norm2(wv);
      for (std::size_t j = 0; j < ku; ++j) {
        const double t = cs[j] * h[j][ku] + sn[j] * h[j + 1][ku];
        h[j + 1][ku] = -sn[j] * h[j][ku] + cs[j] * h[j + 1][ku];
        h[j][ku] = t;
      }
      const Rotation rot = sym_ortho(h[ku][ku], h[ku + 1][ku]);
      cs[ku] = rot.c;
      sn[ku] = rot.s;
      h[ku][ku] = rot.r;
      h[ku + 1][ku] = 0.0;
      g[ku + 1] = -rot.s * g[ku];
      g[ku] = rot.c * g[ku];
      ++total;
      const bool breakdown = basis.size() <= ku + 1 && norm2(wv) <= kTiny;
      if (std::abs(g[ku + 1]) <= cfg.tol * bnorm || breakdown || total >= cfg.max_iter) {
        done = std::abs(g[ku + 1]) <= cfg.tol * bnorm || breakdown;
        ++k;
        break;
      }
      basis.emplace_back(n);
      const double hn = std::max(std::hypot(0.0, norm2(wv)), kTiny);
      for (std::size_t i = 0; i < n; ++i) basis[ku + 1][i] = wv[i] / hn;
    }
    // Back substitution on the k x k triangle.
    std::vector<double> yk(static_cast<std::size_t>(k), 0.0);
    for (int i = k - 1; i >= 0; --i) {
      const auto iu = static_cast<std::size_t>(i);
      double acc = g[iu];
      for (std::size_t j = iu + 1; j < static_cast<std::size_t>(k); ++j) acc -= h[iu][j] * yk[j];
      yk[iu] = h[iu][iu] != 0.0 ? acc / h[iu][iu] : 0.0;
    }
    for (std::size_t j = 0; j < static_cast<std::size_t>(k); ++j) axpy(yk[j], basis[j], rep.x);
    if (done) {
      rep.converged = true;
      break;
    }
  }
  rep.iterations = total;
  rep.residual = relative_residual(a, rep.x, b);
  rep.converged = rep.converged || rep.residual <= cfg.tol;
  rep.stagnated = !rep.converged;
  rep.message = rep.converged ? "gmres converged" : "gmres hit iteration cap";
  return rep;
}

}  // namespace

void LinearSolverConfig::validate() const {
  if (!(tol > 0.0)) throw ParameterError("linear tol must be positive");
  if (max_iter < 1) throw ParameterError("linear max_iter must be >= 1");
  if (lambda_T < 0.0) throw ParameterError("lambda_T must be non-negative");
  if (lambda_shift < 0.0) throw ParameterError("lambda_shift must be non-negative");
  if (!(ilu_drop_replacement > 0.0)) throw ParameterError("ILU drop replacement must be positive");
}

double relative_residual(const LinearOperator& a, std::span<const double> x,
                         std::span<const double> b) {
  std::vector<double> r(a.rows());
  a.apply(x, r);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  const double bn = norm2(b);
  return bn > 0.0 ? norm2(r) / bn : norm2(r);
}

Ilu0::Ilu0(const CsrMatrix& a, double drop_replacement) : n_(a.rows()) {
  if (a.rows() != a.cols()) throw ParameterError("ILU(0) needs a square matrix");
  const auto rp = a.row_offsets();
  const auto ci = a.col_indices();
  const auto va = a.values();
  row_ptr_.assign(n_ + 1, 0);
  diag_pos_.assign(n_, 0);
  std::vector<double> row_scale(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    bool has_diag = false;
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) {
      if (ci[k] == i) has_diag = true;
      if (!has_diag && ci[k] > i) {
        diag_pos_[i] = col_idx_.size();
        col_idx_.push_back(i);
        lu_.push_back(0.0);
        has_diag = true;
      }
      if (ci[k] == i) diag_pos_[i] = col_idx_.size();
      col_idx_.push_back(ci[k]);
      lu_.push_back(va[k]);
      row_scale[i] = std::max(row_scale[i], std::abs(va[k]));
    }
    if (!has_diag) {
      diag_pos_[i] = col_idx_.size();
      col_idx_.push_back(i);
      lu_.push_back(0.0);
    }
    row_ptr_[i + 1] = col_idx_.size();
  }

  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t kk = row_ptr_[i]; kk < diag_pos_[i]; ++kk) {
      const std::size_t k = col_idx_[kk];
      lu_[kk] /= lu_[diag_pos_[k]];
      const double lik = lu_[kk];
      // Merge the strictly-upper part of row k into row i (pattern of row i only).
      std::size_t p = kk + 1;
      for (std::size_t q = diag_pos_[k] + 1; q < row_ptr_[k + 1]; ++q) {
        const std::size_t col = col_idx_[q];
        while (p < row_ptr_[i + 1] && col_idx_[p] < col) ++p;
        if (p == row_ptr_[i + 1]) break;
        if (col_idx_[p] == col) lu_[p] -= lik * lu_[q];
      }
    }
    double& pivot = lu_[diag_pos_[i]];
    const double threshold = row_scale[i] > 0.0 ? 1e-14 * row_scale[i] : 0.0;
    if (std::abs(pivot) <= threshold) {
      pivot = drop_replacement;
      ++replaced_;
    }
  }
}

void Ilu0::solve(std::span<const double> rhs, std::span<double> out) const {
  for (std::size_t i = 0; i < n_; ++i) {
    double acc = rhs[i];
    for (std::size_t k = row_ptr_[i]; k < diag_pos_[i]; ++k) acc -= lu_[k] * out[col_idx_[k]];
    out[i] = acc;
  }
  for (std::size_t i = n_; i-- > 0;) {
    double acc = out[i];
    for (std::size_t k = diag_pos_[i] + 1; k < row_ptr_[i + 1]; ++k) acc -= lu_[k] * out[col_idx_[k]];
    out[i] = acc / lu_[diag_pos_[i]];
  }
}

void Ilu0::solve_transpose(std::span<const double> rhs, std::span<double> out) const {
  std::vector<double> work(rhs.begin(), rhs.end());
  for (std::size_t i = 0; i < n_; ++i) {
    out[i] = work[i] / lu_[diag_pos_[i]];
    for (std::size_t k = diag_pos_[i] + 1; k < row_ptr_[i + 1]; ++k) work[col_idx_[k]] -= lu_[k] * out[i];
  }
  for (std::size_t i = n_; i-- > 0;) {
    for (std::size_t k = row_ptr_[i]; k < diag_pos_[i]; ++k) out[col_idx_[k]] -= lu_[k] * out[i];
  }
}

SolveReport bicgstab_ilu(const CsrMatrix& a, std::span<const double> b,
                         const LinearSolverConfig& config) {
  check_square(a.rows(), a.cols(), b.size(), "bicgstab_ilu");
  const std::size_t n = b.size();
  const double bnorm = norm2(b);
  if (bnorm == 0.0) return zero_rhs_report(n);

  const Ilu0 ilu(a, config.ilu_drop_replacement);
  SolveReport rep;
  rep.zero_pivots_replaced = ilu.zero_pivots_replaced();
  rep.x.assign(n, 0.0);

  std::vector<double> r(b.begin(), b.end());
  std::vector<double> rhat = r;
  std::vector<double> p(n, 0.0), v(n, 0.0), phat(n), s(n), shat(n), t(n);
  std::vector<double> best = rep.x;
  double best_norm = bnorm;
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  const double target = config.tol * bnorm;
  int restarts = 0;
  bool failed = false;

  for (int it = 1; it <= config.max_iter; ++it) {
    rep.iterations = it;
    const double rho_new = dot(rhat, r);
    if (std::abs(rho_new) <= 1e-300 || !std::isfinite(rho_new)) {
      if (restarts++ < 5) {
        rhat = r;
        rho = alpha = omega = 1.0;
        std::fill(p.begin(), p.end(), 0.0);
        std::fill(v.begin(), v.end(), 0.0);
        continue;
      }
      failed = true;
      break;
    }
    const double beta = (rho_new / rho) * (alpha / omega);
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    ilu.solve(p, phat);
    a.multiply(phat, v);
    const double rv = dot(rhat, v);
    if (rv == 0.0 || !std::isfinite(rv)) {
      failed = true;
      break;
    }
    alpha = rho_new / rv;
    for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
    if (norm2(s) <= target) {
      axpy(alpha, phat, rep.x);
      rep.converged = true;
      break;
    }
    ilu.solve(s, shat);
    a.multiply(shat, t);
    const double tt = dot(t, t);
    omega = tt > 0.0 ? dot(t, s) / tt : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      rep.x[i] += alpha * phat[i] + omega * shat[i];
      r[i] = s[i] - omega * t[i];
    }
    rho = rho_new;
    const double rn = norm2(r);
    if (!std::isfinite(rn)) {
      failed = true;
      break;
    }
    if (rn < best_norm) {
      best_norm = rn;
      best = rep.x;
    }
    if (rn <= target) {
      rep.converged = true;
      break;
    }
    if (omega == 0.0) {
      failed = true;
      break;
    }
  }

  const LinearOperator op = LinearOperator::from_matrix(a);
  if (!rep.converged) {
    const double current = relative_residual(op, rep.x, b);
    if (!std::isfinite(current) || current * bnorm > best_norm) rep.x = best;
  }
  rep.residual = relative_residual(op, rep.x, b);
  if (!rep.converged && rep.residual <= config.tol) rep.converged = true;
  rep.message = rep.converged ? "bicgstab converged"
                              : (failed ? "bicgstab breakdown" : "bicgstab hit iteration cap");
  return rep;
}

SolveReport minimum_residual_solve(const LinearOperator& a, std::span<const double> b,
                                   const LinearSolverConfig& config) {
  check_square(a.rows(), a.cols(), b.size(), "minimum_residual_solve");
  if (norm2(b) == 0.0) return zero_rhs_report(b.size());
  return a.symmetric() ? minres(a, b, config) : gmres(a, b, config);
}

SolveReport lstr_solve(const LinearOperator& a, std::span<const double> b, double lambda_T,
                       const LinearSolverConfig& config) {
  if (b.size() != a.rows()) throw ParameterError("lstr_solve: dimension mismatch");
  if (lambda_T < 0.0) throw ParameterError("lstr_solve: lambda_T must be non-negative");
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  SolveReport rep;
  rep.x.assign(n, 0.0);
  const double normb = norm2(b);
  if (normb == 0.0) {
    rep.converged = true;
    rep.message = "zero right-hand side";
    return rep;
  }

  const double atol = config.tol;
  const double btol = config.tol;
  const double damp = lambda_T;

  std::vector<double> u(b.begin(), b.end());
  double beta = normb;
  for (double& ui : u) ui /= beta;
  std::vector<double> v(n), tmp_m(m), tmp_n(n);
  a.apply_transpose(u, v);
  double alpha = norm2(v);
  if (alpha > 0.0) {
    for (double& vi : v) vi /= alpha;
  }

  double zetabar = alpha * beta;
  double alphabar = alpha;
  double rho = 1.0, rhobar = 1.0, cbar = 1.0, sbar = 0.0;
  std::vector<double> h = v;
  std::vector<double> hbar(n, 0.0);

  double betadd = beta, betad = 0.0, rhodold = 1.0, tautildeold = 0.0, thetatilde = 0.0;
  double zeta = 0.0, d = 0.0;
  double norm_a2 = alpha * alpha;
  double norm_a = std::sqrt(norm_a2);

  if (alpha * beta == 0.0) {
    rep.converged = true;
    rep.residual = relative_residual(a, rep.x, b);
    rep.message = "A^T b = 0; x = 0 is a least-squares solution";
    return rep;
  }

  for (int itn = 1; itn <= config.max_iter; ++itn) {
    rep.iterations = itn;
    a.apply(v, tmp_m);
    for (std::size_t i = 0; i < m; ++i) u[i] = tmp_m[i] - alpha * u[i];
    beta = norm2(u);
    if (beta > 0.0) {
      for (double& ui : u) ui /= beta;
      a.apply_transpose(u, tmp_n);
      for (std::size_t i = 0; i < n; ++i) v[i] = tmp_n[i] - beta * v[i];
      alpha = norm2(v);
      if (alpha > 0.0) {
        for (double& vi : v) vi /= alpha;
      }
    }

    const Rotation hat = sym_ortho(alphabar, damp);
    const double chat = hat.c, shat = hat.s, alphahat = hat.r;

    const double rhoold = rho;
    const Rotation p = sym_ortho(alphahat, beta);
    const double c = p.c, s = p.s;
    rho = p.r;
    const double thetanew = s * alpha;
    alphabar = c * alpha;

    const double rhobarold = rhobar;
    const double zetaold = zeta;
    const double thetabar = sbar * rho;
    const double rhotemp = cbar * rho;
    const Rotation pb = sym_ortho(cbar * rho, thetanew);
    cbar = pb.c;
    sbar = pb.s;
    rhobar = pb.r;
    zeta = cbar * zetabar;
    zetabar = -sbar * zetabar;
    (void)rhotemp;

    const double hb_coef = thetabar * rho / (rhoold * rhobarold);
    for (std::size_t i = 0; i < n; ++i) hbar[i] = h[i] - hb_coef * hbar[i];
    const double x_coef = zeta / (rho * rhobar);
    axpy(x_coef, hbar, rep.x);
    const double h_coef = thetanew / rho;
    for (std::size_t i = 0; i < n; ++i) h[i] = v[i] - h_coef * h[i];

    // Residual-norm estimate.
    const double betaacute = chat * betadd;
    const double betacheck = -shat * betadd;
    const double betahat = c * betaacute;
    betadd = -s * betaacute;
    const double thetatildeold = thetatilde;
    const Rotation tilde = sym_ortho(rhodold, thetabar);
    thetatilde = tilde.s * rhobar;
    rhodold = tilde.c * rhobar;
    betad = -tilde.s * betad + tilde.c * betahat;
    tautildeold = (zetaold - thetatildeold * tautildeold) / tilde.r;
    const double taud = (zeta - thetatilde * tautildeold) / rhodold;
    d += betacheck * betacheck;
    const double normr = std::sqrt(d + (betad - taud) * (betad - taud) + betadd * betadd);

    norm_a2 += beta * beta;
    norm_a = std::sqrt(norm_a2);
    norm_a2 += alpha * alpha;

    const double normar = std::abs(zetabar);
    const double normx = norm2(rep.x);
    const double test1 = normr / normb;
    const double test2 = (norm_a * normr) != 0.0 ? normar / (norm_a * normr)
                                                 : std::numeric_limits<double>::infinity();
    const double rtol = btol + atol * norm_a * normx / normb;
    if (test1 <= rtol || test2 <= atol) {
      rep.converged = true;
      break;
    }
    if (!std::isfinite(normr)) break;
  }

  rep.residual = relative_residual(a, rep.x, b);
  rep.stagnated = !rep.converged;
  rep.message = rep.converged ? "lsmr converged" : "lsmr hit iteration cap";
  return rep;
}

std::vector<double> pseudoinverse_solve(const CsrMatrix& a, std::span<const double> b,
                                        std::size_t dense_cap) {
  if (b.size() != a.rows()) throw ParameterError("pseudoinverse_solve: dimension mismatch");
  if (std::max(a.rows(), a.cols()) > dense_cap) {
    throw ParameterError("pseudoinverse_solve: system of size " +
                         std::to_string(std::max(a.rows(), a.cols())) +
                         " exceeds the dense cap; use lstr_solve instead");
  }
  const auto rows = static_cast<Eigen::Index>(a.rows());
  const auto cols = static_cast<Eigen::Index>(a.cols());
  const std::vector<double> dense = a.to_dense();
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
      m(dense.data(), rows, cols);
  const Eigen::BDCSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(m),
                                           Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  const double cutoff = kEps * smax * static_cast<double>(std::max(rows, cols));
  const Eigen::Map<const Eigen::VectorXd> bv(b.data(), rows);
  Eigen::VectorXd coeffs = svd.matrixU().transpose() * bv;
  for (Eigen::Index i = 0; i < sv.size(); ++i) coeffs(i) = sv(i) > cutoff ? coeffs(i) / sv(i) : 0.0;
  const Eigen::VectorXd x = svd.matrixV() * coeffs;
  return {x.data(), x.data() + x.size()};
}

LinearOperator schur_shifted(const LinearOperator& a, double lambda_shift) {
  const double shift = lambda_shift * lambda_shift;
  auto shifted = [a, shift](bool transpose) {
    return [a, shift, transpose](std::span<const double> x, std::span<double> y) {
      if (transpose) {
        a.apply_transpose(x, y);
      } else {
        a.apply(x, y);
      }
      if (shift != 0.0) {
        for (std::size_t i = 0; i < y.size(); ++i) y[i] -= shift * x[i];
      }
    };
  };
  return LinearOperator(a.rows(), a.cols(), shifted(false), shifted(true), a.symmetric());
}

std::vector<double> ScaledSaddle::scale_rhs(std::span<const double> rhs) const {
  std::vector<double> out(rhs.begin(), rhs.end());
  for (std::size_t i = n_primary; i < out.size(); ++i) out[i] *= gamma;
  return out;
}

std::vector<double> ScaledSaddle::unscale_solution(std::span<const double> y) const {
  std::vector<double> out(y.begin(), y.end());
  for (std::size_t i = n_primary; i < out.size(); ++i) out[i] *= gamma;
  return out;
}

ScaledSaddle rescale_saddle(const CsrMatrix& extended, std::size_t n_primary) {
  if (extended.rows() != extended.cols() || n_primary > extended.rows()) {
    throw ParameterError("rescale_saddle: bad block layout");
  }
  ScaledSaddle out;
  out.n_primary = n_primary;
  double sum = 0.0;
  for (std::size_t i = 0; i < n_primary; ++i) sum += std::abs(extended.coeff(i, i));
  const double gamma = n_primary > 0 ? sum / static_cast<double>(n_primary) : 0.0;
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    out.gamma = 1.0;
    out.fell_back = true;
    out.warning = "primary block has a zero diagonal; saddle scaling skipped";
  } else {
    out.gamma = gamma;
  }
  auto entries = extended.triplets();
  for (auto& t : entries) {
    if (t.row >= n_primary) t.value *= out.gamma;
    if (t.col >= n_primary) t.value *= out.gamma;
  }
  out.matrix = CsrMatrix(extended.rows(), extended.cols(), std::move(entries));
  return out;
}

SolveReport solve_linear(const CsrMatrix& a, std::span<const double> b,
                         const LinearSolverConfig& config) {
  config.validate();
  switch (config.method) {
    case LinearMethod::BicgstabIlu:
      return bicgstab_ilu(a, b, config);
    case LinearMethod::MinimumResidual: {
      const LinearOperator op = LinearOperator::from_matrix(a);
      if (config.lambda_shift > 0.0) {
        return minimum_residual_solve(schur_shifted(op, config.lambda_shift), b, config);
      }
      return minimum_residual_solve(op, b, config);
    }
    case LinearMethod::Lstr: {
      if (!config.lstr_ilu) {
        return lstr_solve(LinearOperator::from_matrix(a), b, config.lambda_T, config);
      }
      // Solve min |A M^-1 y - b| and map back x = M^-1 y.
      auto ilu = std::make_shared<const Ilu0>(a, config.ilu_drop_replacement);
      const CsrMatrix* m = &a;
      const std::size_t n = a.cols();
      const LinearOperator pre(
          a.rows(), n,
          [ilu, m, n](std::span<const double> y, std::span<double> out) {
            std::vector<double> z(n);
            ilu->solve(y, z);
            m->multiply(z, out);
          },
          [ilu, m, n](std::span<const double> y, std::span<double> out) {
            std::vector<double> z(n);
            m->multiply_transpose(y, z);
            ilu->solve_transpose(z, out);
          },
          false);
      SolveReport rep = lstr_solve(pre, b, config.lambda_T, config);
      std::vector<double> x(n);
      ilu->solve(rep.x, x);
      rep.x = std::move(x);
      rep.zero_pivots_replaced = ilu->zero_pivots_replaced();
      rep.residual = relative_residual(LinearOperator::from_matrix(a), rep.x, b);
      return rep;
    }
    case LinearMethod::Pseudoinverse: {
      SolveReport rep;
      rep.x = pseudoinverse_solve(a, b, config.dense_cap);
      rep.residual = relative_residual(LinearOperator::from_matrix(a), rep.x, b);
      rep.iterations = 1;
      rep.converged = true;
      rep.message = "dense pseudoinverse";
      return rep;
    }
  }
  throw ParameterError("unknown linear method");
}

}  // namespace porelec
