#include "porelec/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace porelec {

CsrMatrix::CsrMatrix(std::size_t rows, std::size_t cols, std::vector<Triplet> entries)
    : rows_(rows), cols_(cols) {
  for (const auto& t : entries) {
    if (t.row >= rows || t.col >= cols) {
      throw std::out_of_range("triplet index outside matrix dimensions");
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Triplet& x, const Triplet& y) {
    return x.row != y.row ? x.row < y.row : x.col < y.col;
  });

  row_ptr_.assign(rows + 1, 0);
  col_idx_.reserve(entries.size());
  values_.reserve(entries.size());
  std::size_t k = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    while (k < entries.size() && entries[k].row == r) {
      const std::size_t c = entries[k].col;
      double v = 0.0;
      while (k < entries.size() && entries[k].row == r && entries[k].col == c) {
        v += entries[k].value;
        ++k;
      }
      col_idx_.push_back(c);
      values_.push_back(v);
    }
    row_ptr_[r + 1] = col_idx_.size();
  }
}

CsrMatrix CsrMatrix::identity(std::size_t n) {
  std::vector<Triplet> t;
  t.reserve(n);
  for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, 1.0});
  return CsrMatrix(n, n, std::move(t));
}

double CsrMatrix::coeff(std::size_t r, std::size_t c) const {
  const auto first = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r]);
  const auto last = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r + 1]);
  const auto it = std::lower_bound(first, last, c);
  if (it == last || *it != c) return 0.0;
  return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != cols_ || y.size() != rows_) {
    throw std::invalid_argument("CsrMatrix::multiply: dimension mismatch");
  }
  for (std::size_t r = 0; r < rows_; ++r) {
    double acc = 0.0;
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) acc += values_[k] * x[col_idx_[k]];
    y[r] = acc;
  }
}

void CsrMatrix::multiply_transpose(std::span<const double> x, std::span<double> y) const {
  if (x.size() != rows_ || y.size() != cols_) {
    throw std::invalid_argument("CsrMatrix::multiply_transpose: dimension mismatch");
  }
  std::fill(y.begin(), y.end(), 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    const double xr = x[r];
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) y[col_idx_[k]] += values_[k] * xr;
  }
}

std::vector<double> CsrMatrix::operator*(std::span<const double> x) const {
  std::vector<double> y(rows_);
  multiply(x, y);
  return y;
}

std::vector<double> CsrMatrix::diagonal() const {
  std::vector<double> d(std::min(rows_, cols_), 0.0);
  for (std::size_t r = 0; r < d.size(); ++r) d[r] = coeff(r, r);
  return d;
}

CsrMatrix CsrMatrix::transposed() const {
  std::vector<Triplet> t;
  t.reserve(values_.size());
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) t.push_back({col_idx_[k], r, values_[k]});
  }
  return CsrMatrix(cols_, rows_, std::move(t));
}

bool CsrMatrix::is_symmetric(double tol) const {
  if (rows_ != cols_) return false;
  double scale = 0.0;
  for (double v : values_) scale = std::max(scale, std::abs(v));
  const double limit = tol * scale;
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      if (std::abs(values_[k] - coeff(col_idx_[k], r)) > limit) return false;
    }
  }
  return true;
}

std::vector<double> CsrMatrix::to_dense() const {
  std::vector<double> d(rows_ * cols_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) d[r * cols_ + col_idx_[k]] = values_[k];
  }
  return d;
}

std::vector<Triplet> CsrMatrix::triplets() const {
  std::vector<Triplet> t;
  t.reserve(values_.size());
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) t.push_back({r, col_idx_[k], values_[k]});
  }
  return t;
}

LinearOperator::LinearOperator(std::size_t rows, std::size_t cols, Apply apply,
                               Apply apply_transpose, bool symmetric)
    : rows_(rows),
      cols_(cols),
      apply_(std::move(apply)),
      apply_transpose_(std::move(apply_transpose)),
      symmetric_(symmetric) {}

LinearOperator LinearOperator::from_matrix(const CsrMatrix& matrix) {
  const CsrMatrix* m = &matrix;
  return LinearOperator(
      matrix.rows(), matrix.cols(),
      [m](std::span<const double> x, std::span<double> y) { m->multiply(x, y); },
      [m](std::span<const double> x, std::span<double> y) { m->multiply_transpose(x, y); },
      matrix.is_symmetric(1e-14));
}

std::vector<double> LinearOperator::operator*(std::span<const double> x) const {
  std::vector<double> y(rows_);
  apply_(x, y);
  return y;
}

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace porelec
