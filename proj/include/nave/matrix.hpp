#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace nave {

/// Dense row-major matrix of doubles. Rows are feature vectors throughout
/// the library, so row access is the only view offered.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const {
    return {data.data() + r * cols, cols};
  }
  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

/// Copies the listed rows, in order, into a new matrix.
Matrix select_rows(const Matrix& m, std::span<const std::size_t> indices);

/// Stacks matrices with equal column count.
Matrix vstack(std::span<const Matrix> parts);

}  // namespace nave
