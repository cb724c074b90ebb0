#pragma once

#include <cstddef>
#include <vector>

#include "nave/matrix.hpp"

namespace nave {

/// Largest row count a Ward fit accepts; larger inputs are subsampled by the
/// callers with `strided_subsample`.
inline constexpr std::size_t kWardRowCap = 65536;

/// One agglomeration step. Rows are clusters 0..n-1 and the cluster created
/// by merge i gets id n+i (the usual linkage-matrix convention).
struct WardMerge {
  std::size_t a = 0;  // a < b
  std::size_t b = 0;
  /// Increase of the within-cluster sum of squares caused by the merge:
  /// |A||B| / (|A|+|B|) * ||mean(A) - mean(B)||^2.
  double cost = 0.0;
  std::size_t size = 0;
  friend bool operator==(const WardMerge&, const WardMerge&) = default;
};

struct WardModel {
  std::size_t n_rows = 0;
  std::vector<WardMerge> merges;  // n_rows - 1 entries
  std::size_t cut_k = 0;
  /// Labels of the fitted rows at cut_k clusters, numbered by first occurrence.
  std::vector<int> labels;
  /// Mean of each cut cluster, cut_k x D; used to label unseen rows.
  Matrix centroids;
};

/// Agglomerative clustering with Ward's criterion. Each step merges the pair
/// with the smallest cost; exact ties go to the lexicographically smallest
/// (a, b) id pair.
WardModel ward_fit(const Matrix& rows, std::size_t cut_k);

/// Flat labels after applying the first n - k merges, numbered by first
/// occurrence over rows.
std::vector<int> ward_cut(const std::vector<WardMerge>& merges, std::size_t n_rows, std::size_t k);

/// Nearest cut centroid; ties go to the lowest label.
std::vector<int> ward_predict(const WardModel& model, const Matrix& rows);

/// Indices 0, s, 2s, ... with s = ceil(n / cap); every index when n <= cap.
std::vector<std::size_t> strided_subsample(std::size_t n, std::size_t cap);

}  // namespace nave
