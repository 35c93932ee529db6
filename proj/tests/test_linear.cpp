#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "porelec/errors.hpp"
#include "porelec/grid.hpp"
#include "porelec/linear_solvers.hpp"
#include "porelec/sparse.hpp"

using namespace porelec;

namespace {

Eigen::MatrixXd dense(const CsrMatrix& a) {
  const std::vector<double> d = a.to_dense();
  Eigen::MatrixXd m(a.rows(), a.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) m(r, c) = d[r * a.cols() + c];
  }
  return m;
}

CsrMatrix from_dense(const Eigen::MatrixXd& m) {
  std::vector<Triplet> t;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (m(r, c) != 0.0) {
        t.push_back({static_cast<std::size_t>(r), static_cast<std::size_t>(c), m(r, c)});
      }
    }
  }
  return CsrMatrix(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()),
                   std::move(t));
}

std::vector<double> as_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }
Eigen::VectorXd as_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// 1D Dirichlet (at both ends) Poisson matrix, SPD.
CsrMatrix poisson_1d(std::size_t n) {
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < n; ++i) {
    t.push_back({i, i, 2.0});
    if (i > 0) t.push_back({i, i - 1, -1.0});
    if (i + 1 < n) t.push_back({i, i + 1, -1.0});
  }
  return CsrMatrix(n, n, std::move(t));
}

CsrMatrix neumann_laplacian(std::size_t nx, std::size_t ny) {
  const StructuredGrid g(nx, ny, 1.0, 1.0, 1.0);
  return assemble_diffusion(g, std::vector<double>(g.size(), 1.0), DomainBoundary{}).A;
}

std::vector<double> random_vector(std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> d;
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

std::vector<double> remove_mean(std::vector<double> v) {
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  for (double& x : v) x -= m;
  return v;
}

LinearSolverConfig tight() {
  LinearSolverConfig c;
  c.tol = 1e-12;
  c.max_iter = 20000;
  return c;
}

}  // namespace

TEST_SUITE("sparse") {

TEST_CASE("triplets are sorted and duplicates summed") {
  const CsrMatrix a(3, 3, {{2, 0, 1.0}, {0, 2, 2.0}, {0, 0, 1.0}, {0, 2, 3.0}, {1, 1, -4.0}});
  CHECK(a.nonzeros() == 4);
  CHECK(a.coeff(0, 2) == 5.0);
  CHECK(a.coeff(1, 0) == 0.0);
  const auto cols = a.col_indices();
  CHECK(cols[0] == 0);
  CHECK(cols[1] == 2);
  CHECK_THROWS(CsrMatrix(2, 2, {{2, 0, 1.0}}));
}

TEST_CASE("products agree with a dense oracle") {
  Eigen::MatrixXd m = Eigen::MatrixXd::Random(7, 5);
  m(1, 3) = 0.0;
  m(4, 0) = 0.0;
  const CsrMatrix a = from_dense(m);
  const std::vector<double> x = random_vector(5, 1);
  const std::vector<double> y = random_vector(7, 2);
  CHECK((as_eigen(a * x) - m * as_eigen(x)).norm() <= 1e-14 * (m * as_eigen(x)).norm());
  std::vector<double> aty(5);
  a.multiply_transpose(y, aty);
  CHECK((as_eigen(aty) - m.transpose() * as_eigen(y)).norm() <= 1e-13);
  CHECK((dense(a.transposed()) - m.transpose()).norm() == 0.0);
  CHECK(CsrMatrix::identity(4).is_symmetric());
  CHECK_FALSE(a.is_symmetric());
}

}  // TEST_SUITE

TEST_SUITE("linear") {

TEST_CASE("ILU(0) of a tridiagonal matrix is its exact LU") {
  const CsrMatrix a = poisson_1d(20);
  const Ilu0 ilu(a, 1e-3);
  const std::vector<double> b = random_vector(20, 3);
  std::vector<double> x(20);
  ilu.solve(b, x);
  const Eigen::VectorXd ref = dense(a).lu().solve(as_eigen(b));
  CHECK((as_eigen(x) - ref).norm() <= 1e-12 * ref.norm());
  std::vector<double> xt(20);
  ilu.solve_transpose(b, xt);
  CHECK((as_eigen(xt) - dense(a).transpose().lu().solve(as_eigen(b))).norm() <= 1e-12 * ref.norm());
  CHECK(ilu.zero_pivots_replaced() == 0);
}

TEST_CASE("ILU(0) zero pivots are replaced and counted") {
  // The all-Neumann Laplacian's last pivot vanishes in exact arithmetic.
  const CsrMatrix a = neumann_laplacian(6, 1);
  const Ilu0 first(a, 1e-3);
  const Ilu0 second(a, 1e-3);
  CHECK(first.zero_pivots_replaced() == 1);
  CHECK(second.zero_pivots_replaced() == first.zero_pivots_replaced());
  const CsrMatrix z(2, 2, {{0, 1, 1.0}, {1, 0, 1.0}});
  CHECK(Ilu0(z, 1e-3).zero_pivots_replaced() >= 1);
}

TEST_CASE("BiCGSTAB-ILU") {
  LinearSolverConfig cfg;
  SUBCASE("identity") {
    const std::vector<double> b = random_vector(10, 4);
    const SolveReport r = bicgstab_ilu(CsrMatrix::identity(10), b, cfg);
    CHECK(r.converged);
    CHECK(r.iterations <= 1);
    CHECK((as_eigen(r.x) - as_eigen(b)).norm() <= 1e-12);
  }
  SUBCASE("1D Poisson with a known solution") {
    const CsrMatrix a = poisson_1d(64);
    const std::vector<double> xs = random_vector(64, 5);
    const std::vector<double> b = a * xs;
    const SolveReport r = bicgstab_ilu(a, b, cfg);
    CHECK(r.converged);
    CHECK(r.residual <= cfg.tol);
    CHECK(r.residual == doctest::Approx(relative_residual(LinearOperator::from_matrix(a), r.x, b)).epsilon(1e-12));
    CHECK((as_eigen(r.x) - as_eigen(xs)).norm() <= 1e-6 * as_eigen(xs).norm());
  }
  SUBCASE("singular system with incompatible data reports failure") {
    const CsrMatrix a = neumann_laplacian(8, 8);
    const std::vector<double> b(64, 1.0);
    const SolveReport r = bicgstab_ilu(a, b, cfg);
    CHECK_FALSE(r.converged);
    CHECK(r.residual > 1e-3);
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS(bicgstab_ilu(poisson_1d(4), std::vector<double>(3, 1.0), cfg));
  }
}

TEST_CASE("minimum-residual solves") {
  const LinearSolverConfig cfg = tight();
  SUBCASE("SPD agrees with BiCGSTAB") {
    const CsrMatrix a = poisson_1d(50);
    const std::vector<double> b = random_vector(50, 6);
    const SolveReport m = minimum_residual_solve(LinearOperator::from_matrix(a), b, cfg);
    const SolveReport s = bicgstab_ilu(a, b, cfg);
    CHECK(m.converged);
    CHECK((as_eigen(m.x) - as_eigen(s.x)).norm() <= 1e-8 * as_eigen(s.x).norm());
    CHECK(m.residual == doctest::Approx(relative_residual(LinearOperator::from_matrix(a), m.x, b)).epsilon(1e-12));
  }
  SUBCASE("singular Laplacian with compatible data") {
    const CsrMatrix a = neumann_laplacian(10, 10);
    const std::vector<double> b = remove_mean(random_vector(100, 7));
    const SolveReport r = minimum_residual_solve(LinearOperator::from_matrix(a), b, cfg);
    CHECK(r.residual <= 1e-10);
    std::vector<double> shifted = r.x;
    for (double& v : shifted) v += 3.7;
    CHECK(relative_residual(LinearOperator::from_matrix(a), shifted, b) <= 1e-9);
  }
  SUBCASE("zero right-hand side") {
    const SolveReport r =
        minimum_residual_solve(LinearOperator::from_matrix(poisson_1d(8)), std::vector<double>(8, 0.0), cfg);
    CHECK(as_eigen(r.x).norm() == 0.0);
  }
  SUBCASE("nonsymmetric operator goes through GMRES") {
    Eigen::MatrixXd m = Eigen::MatrixXd::Random(30, 30) + 10.0 * Eigen::MatrixXd::Identity(30, 30);
    const CsrMatrix a = from_dense(m);
    CHECK_FALSE(LinearOperator::from_matrix(a).symmetric());
    const std::vector<double> b = random_vector(30, 8);
    const SolveReport r = minimum_residual_solve(LinearOperator::from_matrix(a), b, cfg);
    const Eigen::VectorXd ref = m.lu().solve(as_eigen(b));
    CHECK(r.converged);
    CHECK((as_eigen(r.x) - ref).norm() <= 1e-9 * ref.norm());
  }
}

TEST_CASE("damped least squares") {
  LinearSolverConfig cfg = tight();
  SUBCASE("undamped, nonsingular") {
    Eigen::MatrixXd m = Eigen::MatrixXd::Random(25, 25) + 6.0 * Eigen::MatrixXd::Identity(25, 25);
    const std::vector<double> b = random_vector(25, 9);
    const SolveReport r = lstr_solve(LinearOperator::from_matrix(from_dense(m)), b, 0.0, cfg);
    const Eigen::VectorXd ref = m.lu().solve(as_eigen(b));
    CHECK((as_eigen(r.x) - ref).norm() <= 1e-8 * ref.norm());
  }
  SUBCASE("singular Laplacian: damped solution is the minimum-norm one") {
    const CsrMatrix a = neumann_laplacian(6, 5);
    const std::vector<double> b = remove_mean(random_vector(30, 10));
    const SolveReport r = lstr_solve(LinearOperator::from_matrix(a), b, 1e-8, cfg);
    const std::vector<double> pinv = pseudoinverse_solve(a, b);
    CHECK((as_eigen(r.x) - as_eigen(pinv)).norm() <= 1e-6 * as_eigen(pinv).norm());
    const double mean = as_eigen(r.x).mean();
    CHECK(std::abs(mean) <= 1e-8 * as_eigen(r.x).norm());
  }
  SUBCASE("zero right-hand side") {
    const SolveReport r =
        lstr_solve(LinearOperator::from_matrix(poisson_1d(9)), std::vector<double>(9, 0.0), 1e-3, cfg);
    CHECK(as_eigen(r.x).norm() == 0.0);
  }
  SUBCASE("random rank-deficient systems agree with the SVD path") {
    for (unsigned seed = 0; seed < 5; ++seed) {
      std::mt19937 rng(seed);
      std::uniform_int_distribution<int> dim(10, 100);
      const int n = dim(rng);
      const int rank = n / 2;
      const Eigen::MatrixXd u = Eigen::MatrixXd::Random(n, rank);
      const Eigen::MatrixXd v = Eigen::MatrixXd::Random(rank, n);
      const Eigen::MatrixXd m = u * v;
      const CsrMatrix a = from_dense(m);
      const std::vector<double> b = random_vector(static_cast<std::size_t>(n), seed + 100);
      const std::vector<double> pinv = pseudoinverse_solve(a, b);
      cfg.tol = 1e-14;
      const SolveReport r = lstr_solve(LinearOperator::from_matrix(a), b, 1e-10, cfg);
      CAPTURE(n);
      CHECK((as_eigen(r.x) - as_eigen(pinv)).norm() <= 1e-6 * as_eigen(pinv).norm());
    }
  }
}

TEST_CASE("pseudoinverse") {
  const std::vector<double> b = random_vector(6, 11);
  CHECK((as_eigen(pseudoinverse_solve(CsrMatrix::identity(6), b)) - as_eigen(b)).norm() <= 1e-14);

  const Eigen::VectorXd u = Eigen::VectorXd::Random(5);
  const Eigen::VectorXd v = Eigen::VectorXd::Random(5);
  const std::vector<double> x = pseudoinverse_solve(from_dense(u * v.transpose()), as_vec(u));
  CHECK((as_eigen(x) - v / v.squaredNorm()).norm() <= 1e-12 * v.norm() / v.squaredNorm());

  const CsrMatrix lap = neumann_laplacian(5, 4);
  const std::vector<double> xs = pseudoinverse_solve(lap, remove_mean(random_vector(20, 12)));
  CHECK(std::abs(as_eigen(xs).sum()) <= 1e-12 * as_eigen(xs).norm() * 20);

  CHECK_THROWS_AS(pseudoinverse_solve(poisson_1d(30), random_vector(30, 1), 20), ParameterError);
}

TEST_CASE("Schur shift") {
  const CsrMatrix lap = neumann_laplacian(10, 1);
  const LinearOperator op = LinearOperator::from_matrix(lap);
  const std::vector<double> x = random_vector(10, 13);
  CHECK(as_eigen(schur_shifted(op, 0.0) * x) == as_eigen(op * x));

  const double lam = 1e-2;
  const std::vector<double> ones(10, 1.0);
  const std::vector<double> y = schur_shifted(op, lam) * ones;
  for (double v : y) CHECK(v == doctest::Approx(-lam * lam).epsilon(1e-12));

  Eigen::MatrixXd m(10, 10);
  const LinearOperator shifted = schur_shifted(op, lam);
  for (int c = 0; c < 10; ++c) {
    std::vector<double> e(10, 0.0);
    e[static_cast<std::size_t>(c)] = 1.0;
    m.col(c) = as_eigen(shifted * e);
  }
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues();
  Eigen::Index k = 0;
  ev.cwiseAbs().minCoeff(&k);
  CHECK(ev[k] == doctest::Approx(-lam * lam).epsilon(1e-8));
}

TEST_CASE("saddle rescaling") {
  SUBCASE("unit diagonal is left alone") {
    const CsrMatrix j(3, 3, {{0, 0, 1.0}, {1, 1, 1.0}, {0, 2, 1.0}, {2, 0, 1.0}});
    const ScaledSaddle s = rescale_saddle(j, 2);
    CHECK(s.gamma == 1.0);
    CHECK(dense(s.matrix) == dense(j));
  }
  SUBCASE("toy system: constraint entries lifted, conditioning improves") {
    const CsrMatrix j(3, 3, {{0, 0, 1e6}, {1, 1, 1e6}, {0, 2, 1.0}, {2, 0, 1.0}, {1, 2, 1.0}, {2, 1, 1.0}});
    const ScaledSaddle s = rescale_saddle(j, 2);
    CHECK(s.gamma == doctest::Approx(1e6));
    CHECK(s.matrix.coeff(0, 2) == doctest::Approx(1e6));
    auto cond = [](const Eigen::MatrixXd& m) {
      const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues();
      return sv[0] / sv[sv.size() - 1];
    };
    CHECK(cond(dense(s.matrix)) < cond(dense(j)));
  }
  SUBCASE("round trip matches a dense solve of the original system") {
    const std::size_t n = 20;
    std::vector<Triplet> t;
    for (const Triplet& e : neumann_laplacian(n, 1).triplets()) t.push_back({e.row, e.col, 500.0 * e.value});
    t.push_back({3, n, 1.0});
    t.push_back({n, 3, 1.0});
    const CsrMatrix j(n + 1, n + 1, std::move(t));
    std::vector<double> rhs = remove_mean(random_vector(n, 14));
    rhs.push_back(0.25);
    const ScaledSaddle s = rescale_saddle(j, n);
    const Eigen::VectorXd ys = dense(s.matrix).fullPivLu().solve(as_eigen(s.scale_rhs(rhs)));
    const std::vector<double> x = s.unscale_solution(as_vec(ys));
    const Eigen::VectorXd ref = dense(j).fullPivLu().solve(as_eigen(rhs));
    CHECK((as_eigen(x) - ref).norm() <= 1e-10 * ref.norm());
    CHECK(x[3] == doctest::Approx(0.25));
  }
  SUBCASE("zero primary diagonal falls back with a warning") {
    const CsrMatrix j(2, 2, {{0, 1, 1.0}, {1, 0, 1.0}});
    const ScaledSaddle s = rescale_saddle(j, 1);
    CHECK(s.fell_back);
    CHECK(s.gamma == 1.0);
    CHECK_FALSE(s.warning.empty());
  }
}

TEST_CASE("solve_linear dispatch") {
  const CsrMatrix lap = neumann_laplacian(12, 12);
  const std::vector<double> b = remove_mean(random_vector(lap.rows(), 15));
  LinearSolverConfig cfg;
  cfg.tol = 1e-10;
  cfg.max_iter = 5000;
  for (LinearMethod m : {LinearMethod::MinimumResidual, LinearMethod::Lstr, LinearMethod::Pseudoinverse}) {
    cfg.method = m;
    const SolveReport r = solve_linear(lap, b, cfg);
    CAPTURE(static_cast<int>(m));
    CHECK(r.residual <= 1e-8);
  }
  cfg.method = LinearMethod::MinimumResidual;
  cfg.lambda_shift = 1e-4;
  CHECK(solve_linear(lap, b, cfg).residual <= 1e-6);
  cfg.tol = 0.0;
  CHECK_THROWS_AS(solve_linear(lap, b, cfg), ParameterError);
}

}  // TEST_SUITE
