#include "nave/ward.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "nave/error.hpp"

namespace nave {
namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

// Active clusters live in slots 0..n-1. A merge keeps the result in the slot
// of its lower-id member, so centroid storage stays n x D.
class WardState {
 public:
  explicit WardState(const Matrix& rows)
      : n_(rows.rows), dim_(rows.cols), centroid_(rows), size_(n_, 1), id_(n_), active_(n_, true),
        best_cost_(n_, std::numeric_limits<double>::infinity()), best_slot_(n_, kNone) {
    std::iota(id_.begin(), id_.end(), std::size_t{0});
    for (std::size_t s = 0; s < n_; ++s) refresh(s);
  }

  std::vector<WardMerge> run() {
    std::vector<WardMerge> merges;
    merges.reserve(n_ > 0 ? n_ - 1 : 0);
    for (std::size_t step = 0; step + 1 < n_; ++step) {
      std::size_t sa = kNone;
      for (std::size_t s = 0; s < n_; ++s) {
        if (!active_[s] || best_slot_[s] == kNone) continue;
        if (sa == kNone || precedes(s, sa)) sa = s;
      }
      const std::size_t sb = best_slot_[sa];
      const double cost = best_cost_[sa];
      merges.push_back({id_[sa], id_[sb], cost, size_[sa] + size_[sb]});
      merge_into(sa, sb, n_ + step);
    }
    return merges;
  }

 private:
  double cost(std::size_t s, std::size_t t) const {
    const double ns = static_cast<double>(size_[s]);
    const double nt = static_cast<double>(size_[t]);
    return ns * nt / (ns + nt) * squared_distance(centroid_.row(s), centroid_.row(t));
  }

  // Ordering of candidate pairs (cost, id_a, id_b) for slots with a partner.
  bool precedes(std::size_t s, std::size_t t) const {
    if (best_cost_[s] != best_cost_[t]) return best_cost_[s] < best_cost_[t];
    if (id_[s] != id_[t]) return id_[s] < id_[t];
    return id_[best_slot_[s]] < id_[best_slot_[t]];
  }

  // Best partner of s among active clusters with a larger id.
  void refresh(std::size_t s) {
    best_cost_[s] = std::numeric_limits<double>::infinity();
    best_slot_[s] = kNone;
    for (std::size_t t = 0; t < n_; ++t) {
      if (!active_[t] || id_[t] <= id_[s]) continue;
      const double c = cost(s, t);
      if (best_slot_[s] == kNone || c < best_cost_[s] ||
          (c == best_cost_[s] && id_[t] < id_[best_slot_[s]])) {
        best_cost_[s] = c;
        best_slot_[s] = t;
      }
    }
  }

  void merge_into(std::size_t sa, std::size_t sb, std::size_t new_id) {
    const double na = static_cast<double>(size_[sa]);
    const double nb = static_cast<double>(size_[sb]);
    auto ca = centroid_.row(sa);
    const auto cb = centroid_.row(sb);
    for (std::size_t d = 0; d < dim_; ++d) ca[d] = (na * ca[d] + nb * cb[d]) / (na + nb);
    size_[sa] += size_[sb];
    id_[sa] = new_id;
    active_[sb] = false;
    best_slot_[sb] = kNone;
    // The new cluster has the largest id, so it has no partners of its own.
    best_slot_[sa] = kNone;
    best_cost_[sa] = std::numeric_limits<double>::infinity();

    for (std::size_t t = 0; t < n_; ++t) {
      if (!active_[t] || t == sa) continue;
      if (best_slot_[t] == sa || best_slot_[t] == sb) {
        refresh(t);
      } else {
        const double c = cost(t, sa);
        if (best_slot_[t] == kNone || c < best_cost_[t]) {
          best_cost_[t] = c;
          best_slot_[t] = sa;
        }
      }
    }
  }

  std::size_t n_;
  std::size_t dim_;
  Matrix centroid_;
  std::vector<std::size_t> size_;
  std::vector<std::size_t> id_;
  std::vector<bool> active_;
  std::vector<double> best_cost_;
  std::vector<std::size_t> best_slot_;
};

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

Matrix cluster_means(const Matrix& rows, const std::vector<int>& labels, std::size_t k) {
  Matrix means(k, rows.cols);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t r = 0; r < rows.rows; ++r) {
    const auto l = static_cast<std::size_t>(labels[r]);
    ++counts[l];
    auto m = means.row(l);
    const auto x = rows.row(r);
    for (std::size_t d = 0; d < rows.cols; ++d) m[d] += x[d];
  }
  for (std::size_t c = 0; c < k; ++c) {
    for (double& v : means.row(c)) v /= static_cast<double>(counts[c]);
  }
  return means;
}

}  // namespace

WardModel ward_fit(const Matrix& rows, std::size_t cut_k) {
  if (cut_k < 1) throw ArgumentError("ward: cut K must be >= 1");
  if (rows.rows < cut_k) {
    throw ArgumentError("ward: " + std::to_string(rows.rows) + " rows is fewer than K=" +
                        std::to_string(cut_k));
  }
  if (rows.rows > kWardRowCap) {
    throw ArgumentError("ward: " + std::to_string(rows.rows) + " rows exceeds the cap of " +
                        std::to_string(kWardRowCap) + "; subsample first");
  }
  WardModel m;
  m.n_rows = rows.rows;
  m.cut_k = cut_k;
  m.merges = WardState(rows).run();
  m.labels = ward_cut(m.merges, m.n_rows, cut_k);
  m.centroids = cluster_means(rows, m.labels, cut_k);
  return m;
}

std::vector<int> ward_cut(const std::vector<WardMerge>& merges, std::size_t n_rows, std::size_t k) {
  if (k < 1 || k > n_rows) throw ArgumentError("ward cut: K must be in [1, n]");
  if (merges.size() + 1 != n_rows) throw ArgumentError("ward cut: merge list does not match n");
  std::vector<std::size_t> parent(2 * n_rows - 1);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  for (std::size_t i = 0; i < n_rows - k; ++i) {
    const WardMerge& mg = merges[i];
    if (mg.a >= n_rows + i || mg.b >= n_rows + i) throw ArgumentError("ward cut: invalid merge index");
    parent[find_root(parent, mg.a)] = n_rows + i;
    parent[find_root(parent, mg.b)] = n_rows + i;
  }
  std::vector<int> labels(n_rows);
  std::vector<int> label_of(2 * n_rows - 1, -1);
  int next = 0;
  for (std::size_t r = 0; r < n_rows; ++r) {
    const std::size_t root = find_root(parent, r);
    if (label_of[root] < 0) label_of[root] = next++;
    labels[r] = label_of[root];
  }
  return labels;
}

std::vector<int> ward_predict(const WardModel& model, const Matrix& rows) {
  if (rows.cols != model.centroids.cols) {
    throw ArgumentError("ward predict: row dimension " + std::to_string(rows.cols) +
                        " does not match model dimension " + std::to_string(model.centroids.cols));
  }
  std::vector<int> labels(rows.rows);
  for (std::size_t r = 0; r < rows.rows; ++r) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < model.centroids.rows; ++c) {
      const double d = squared_distance(rows.row(r), model.centroids.row(c));
      if (d < best) {
        best = d;
        labels[r] = static_cast<int>(c);
      }
    }
  }
  return labels;
}

std::vector<std::size_t> strided_subsample(std::size_t n, std::size_t cap) {
  if (cap == 0) throw ArgumentError("subsample cap must be >= 1");
  const std::size_t stride = n <= cap ? 1 : (n + cap - 1) / cap;
  std::vector<std::size_t> idx;
  idx.reserve((n + stride - 1) / stride);
  for (std::size_t i = 0; i < n; i += stride) idx.push_back(i);
  return idx;
}

}  // namespace nave
