#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace tailvar {

using Vec = std::vector<double>;

// Dense row-major matrix.  Small and deliberately minimal: the models in this
// library work with hidden sizes in the tens, so a cache-friendly layout plus
// tight loops is all that is needed.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  std::span<double> flat() { return {data_.data(), data_.size()}; }
  std::span<const double> flat() const { return {data_.data(), data_.size()}; }

  void fill(double value) { data_.assign(data_.size(), value); }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Vec data_;
};

// y = m x, or y += m x when accumulate is set.
inline void gemv(const Matrix& m, std::span<const double> x,
                 std::span<double> y, bool accumulate = false) {
  if (x.size() != m.cols() || y.size() != m.rows()) {
    throw std::invalid_argument("gemv: dimension mismatch");
  }
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double acc = accumulate ? y[r] : 0.0;
    const double* row = m.data() + r * m.cols();
    for (std::size_t c = 0; c < m.cols(); ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
}

// y += m^T x.
inline void gemv_transposed_add(const Matrix& m, std::span<const double> x,
                                std::span<double> y) {
  if (x.size() != m.rows() || y.size() != m.cols()) {
    throw std::invalid_argument("gemv_transposed_add: dimension mismatch");
  }
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double* row = m.data() + r * m.cols();
    const double xr = x[r];
    for (std::size_t c = 0; c < m.cols(); ++c) y[c] += row[c] * xr;
  }
}

// m += a b^T (rank-one update).
inline void add_outer(Matrix& m, std::span<const double> a,
                      std::span<const double> b) {
  if (a.size() != m.rows() || b.size() != m.cols()) {
    throw std::invalid_argument("add_outer: dimension mismatch");
  }
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double* row = m.data() + r * m.cols();
    const double ar = a[r];
    for (std::size_t c = 0; c < m.cols(); ++c) row[c] += ar * b[c];
  }
}

}  // namespace tailvar
