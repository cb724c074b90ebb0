#include "nave/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nave/error.hpp"
#include "nave/rng.hpp"

namespace nave {
namespace {

struct Assignment {
  std::vector<int> labels;
  std::vector<double> dist;  // squared distance to the assigned centroid
  double inertia = 0.0;
};

Assignment assign(const Matrix& centroids, const Matrix& rows) {
  Assignment a;
  a.labels.resize(rows.rows);
  a.dist.resize(rows.rows);
  for (std::size_t r = 0; r < rows.rows; ++r) {
    const auto x = rows.row(r);
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (std::size_t c = 0; c < centroids.rows; ++c) {
      const double d = squared_distance(x, centroids.row(c));
      if (d < best) {
        best = d;
        arg = static_cast<int>(c);
      }
    }
    a.labels[r] = arg;
    a.dist[r] = best;
  }
  for (double d : a.dist) a.inertia += d;
  return a;
}

// Index whose cumulative weight first exceeds `target`, skipping zero
// weights; falls back to the last positive weight when rounding pushes the
// target past the end.
std::size_t sample_weighted(const std::vector<double>& w, double target) {
  double acc = 0.0;
  for (std::size_t r = 0; r < w.size(); ++r) {
    acc += w[r];
    if (w[r] > 0.0 && acc > target) return r;
  }
  for (std::size_t r = w.size(); r-- > 0;) {
    if (w[r] > 0.0) return r;
  }
  return 0;
}

// Greedy k-means++ as in scikit-learn: each new center is the best of
// 2 + floor(ln k) candidates drawn by D^2 sampling, judged by the potential
// (sum of squared distances to the nearest center) it would leave.
Matrix plus_plus_init(const Matrix& rows, std::size_t k, Rng& rng) {
  const std::size_t n = rows.rows;
  const std::size_t trials = 2 + static_cast<std::size_t>(std::log(static_cast<double>(k)));
  Matrix centers(k, rows.cols);
  std::size_t pick = rng.below(n);
  std::copy_n(rows.row(pick).begin(), rows.cols, centers.row(0).begin());

  std::vector<double> d2(n);
  for (std::size_t r = 0; r < n; ++r) d2[r] = squared_distance(rows.row(r), centers.row(0));

  std::vector<double> cand_d2(n), best_d2(n);
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double d : d2) total += d;
    if (total > 0.0) {
      double best_potential = std::numeric_limits<double>::infinity();
      for (std::size_t t = 0; t < trials; ++t) {
        const std::size_t cand = sample_weighted(d2, rng.uniform() * total);
        double potential = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          cand_d2[r] = std::min(d2[r], squared_distance(rows.row(r), rows.row(cand)));
          potential += cand_d2[r];
        }
        if (potential < best_potential) {
          best_potential = potential;
          pick = cand;
          best_d2.swap(cand_d2);
        }
      }
      d2.swap(best_d2);
    } else {
      // Every row coincides with a chosen center.
      pick = rng.below(n);
    }
    std::copy_n(rows.row(pick).begin(), rows.cols, centers.row(c).begin());
  }
  return centers;
}

Matrix update_centroids(const Matrix& rows, Assignment& a, const Matrix& previous) {
  const std::size_t k = previous.rows;
  const std::size_t dim = rows.cols;
  std::vector<std::size_t> counts(k, 0);
  for (int l : a.labels) ++counts[static_cast<std::size_t>(l)];

  // Re-seed empty clusters with the farthest rows from clusters that can
  // spare one.
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] != 0) continue;
    std::size_t far = rows.rows;
    double far_d = -1.0;
    for (std::size_t r = 0; r < rows.rows; ++r) {
      if (counts[static_cast<std::size_t>(a.labels[r])] > 1 && a.dist[r] > far_d) {
        far_d = a.dist[r];
        far = r;
      }
    }
    if (far == rows.rows) continue;
    --counts[static_cast<std::size_t>(a.labels[far])];
    a.labels[far] = static_cast<int>(c);
    a.dist[far] = 0.0;
    counts[c] = 1;
  }

  Matrix sums(k, dim);
  for (std::size_t r = 0; r < rows.rows; ++r) {
    auto s = sums.row(static_cast<std::size_t>(a.labels[r]));
    const auto x = rows.row(r);
    for (std::size_t d = 0; d < dim; ++d) s[d] += x[d];
  }
  for (std::size_t c = 0; c < k; ++c) {
    auto s = sums.row(c);
    if (counts[c] == 0) {
      std::copy_n(previous.row(c).begin(), dim, s.begin());
      continue;
    }
    const double inv = 1.0 / static_cast<double>(counts[c]);
    for (double& v : s) v *= inv;
  }
  return sums;
}

KMeansModel lloyd(const Matrix& rows, Matrix centers, const KMeansOptions& opt) {
  KMeansModel m;
  m.k = opt.k;
  m.seed = opt.seed;
  Assignment a = assign(centers, rows);
  m.inertia_history.push_back(a.inertia);
  for (std::size_t it = 1; it <= opt.max_iter; ++it) {
    const double prev = a.inertia;
    centers = update_centroids(rows, a, centers);
    a = assign(centers, rows);
    m.inertia_history.push_back(a.inertia);
    m.iterations_run = it;
    if (prev <= 0.0 || (prev - a.inertia) / prev < opt.tol) break;
  }
  m.centroids = std::move(centers);
  m.inertia = a.inertia;
  return m;
}

}  // namespace

KMeansModel kmeans_fit(const Matrix& rows, const KMeansOptions& options) {
  if (options.k < 2) throw ArgumentError("k-means: K must be >= 2");
  if (rows.rows < options.k) {
    throw ArgumentError("k-means: " + std::to_string(rows.rows) + " rows is fewer than K=" +
                        std::to_string(options.k));
  }
  if (rows.cols == 0) throw ArgumentError("k-means: rows have zero dimension");
  if (options.restarts < 1) throw ArgumentError("k-means: restarts must be >= 1");

  Rng rng(options.seed);
  KMeansModel best;
  for (std::size_t r = 0; r < options.restarts; ++r) {
    KMeansModel m = lloyd(rows, plus_plus_init(rows, options.k, rng), options);
    if (r == 0 || m.inertia < best.inertia) best = std::move(m);
  }
  return best;
}

std::vector<int> kmeans_predict(const KMeansModel& model, const Matrix& rows) {
  if (rows.cols != model.centroids.cols) {
    throw ArgumentError("k-means predict: row dimension " + std::to_string(rows.cols) +
                        " does not match model dimension " + std::to_string(model.centroids.cols));
  }
  return assign(model.centroids, rows).labels;
}

double kmeans_inertia(const KMeansModel& model, const Matrix& rows) {
  if (rows.cols != model.centroids.cols) {
    throw ArgumentError("k-means inertia: dimension mismatch");
  }
  return assign(model.centroids, rows).inertia;
}

}  // namespace nave
