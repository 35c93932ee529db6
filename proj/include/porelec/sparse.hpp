#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace porelec {

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Compressed sparse row matrix. Column indices are sorted within each row and
/// duplicates are summed at construction.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  CsrMatrix(std::size_t rows, std::size_t cols, std::vector<Triplet> entries);

  static CsrMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nonzeros() const noexcept { return values_.size(); }

  std::span<const std::size_t> row_offsets() const noexcept { return row_ptr_; }
  std::span<const std::size_t> col_indices() const noexcept { return col_idx_; }
  std::span<const double> values() const noexcept { return values_; }

  /// Entry (r, c), zero when outside the pattern.
  double coeff(std::size_t r, std::size_t c) const;

  /// y = A x
  void multiply(std::span<const double> x, std::span<double> y) const;
  /// y = A^T x
  void multiply_transpose(std::span<const double> x, std::span<double> y) const;
  std::vector<double> operator*(std::span<const double> x) const;

  std::vector<double> diagonal() const;
  CsrMatrix transposed() const;

  /// max |a_ij - a_ji| <= tol * max |a_ij|
  bool is_symmetric(double tol = 0.0) const;

  /// Row-major dense copy.
  std::vector<double> to_dense() const;

  std::vector<Triplet> triplets() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_idx_;
  std::vector<double> values_;
};

/// Matrix-free linear map. Solvers that only need products take this.
class LinearOperator {
 public:
  using Apply = std::function<void(std::span<const double>, std::span<double>)>;

  LinearOperator(std::size_t rows, std::size_t cols, Apply apply, Apply apply_transpose,
                 bool symmetric);

  /// Wraps a matrix by reference; the matrix must outlive the operator.
  static LinearOperator from_matrix(const CsrMatrix& matrix);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool symmetric() const noexcept { return symmetric_; }

  void apply(std::span<const double> x, std::span<double> y) const { apply_(x, y); }
  void apply_transpose(std::span<const double> x, std::span<double> y) const {
    apply_transpose_(x, y);
  }
  std::vector<double> operator*(std::span<const double> x) const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  Apply apply_;
  Apply apply_transpose_;
  bool symmetric_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm_inf(std::span<const double> a);

}  // namespace porelec
