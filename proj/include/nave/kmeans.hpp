#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "nave/matrix.hpp"

namespace nave {

struct KMeansOptions {
  std::size_t k = 5;
  std::uint64_t seed = 0;
  std::size_t max_iter = 300;
  /// Stop once (previous - current) / previous inertia falls below this.
  double tol = 1e-4;
  /// Independent k-means++ initializations; the lowest inertia wins.
  std::size_t restarts = 1;
};

struct KMeansModel {
  std::size_t k = 0;
  Matrix centroids;  // k x D
  double inertia = 0.0;
  std::uint64_t seed = 0;
  std::size_t iterations_run = 0;
  /// Inertia after the initial assignment and after every Lloyd step of the
  /// winning restart.
  std::vector<double> inertia_history;
};

/// Lloyd iterations from greedy k-means++ (D^2) seeding. Deterministic in
/// (rows, options). Empty clusters are re-seeded with the row farthest from
/// its current centroid.
KMeansModel kmeans_fit(const Matrix& rows, const KMeansOptions& options);

/// Nearest centroid under squared Euclidean distance; ties go to the lowest
/// index.
std::vector<int> kmeans_predict(const KMeansModel& model, const Matrix& rows);

/// Sum of squared distances from rows to their assigned centroid.
double kmeans_inertia(const KMeansModel& model, const Matrix& rows);

}  // namespace nave
