#pragma once

#include <cstddef>
#include <vector>

#include "nave/matrix.hpp"

namespace nave {

struct PcaOptions {
  /// Dimensions up to this use a dense covariance eigendecomposition;
  /// above it, block subspace iteration on the centered data.
  std::size_t exact_max_dim = 4096;
  double subspace_tol = 1e-10;
  std::size_t subspace_max_iter = 2000;
};

struct PcaModel {
  std::vector<double> mean;              // D
  Matrix components;                     // k x D, orthonormal rows
  std::vector<double> explained_variance;  // k, non-increasing, divisor n - 1
  double total_variance = 0.0;           // trace of the covariance
  /// All rows were identical; components are then the first k unit axes.
  bool degenerate = false;

  std::size_t k() const { return components.rows; }
  double explained_variance_ratio(std::size_t i) const {
    return total_variance > 0.0 ? explained_variance[i] / total_variance : 0.0;
  }
};

/// Top-k principal axes of the centered rows. Each component is signed so its
/// largest-magnitude coordinate is positive.
PcaModel pca_fit(const Matrix& rows, std::size_t k, const PcaOptions& options = {});

/// (rows - mean) * components^T, one k-vector per row.
Matrix pca_project(const PcaModel& model, const Matrix& rows);

/// Label each row with the component of greatest absolute projection
/// (ties to the lower component).
std::vector<int> pca_labels(const Matrix& projected);

}  // namespace nave
