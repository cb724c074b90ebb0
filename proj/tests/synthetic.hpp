#pragma once

// Planted-structure activation stacks shared by the unit and acceptance
// suites.

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "nave/manifest.hpp"
#include "nave/matrix.hpp"

namespace synth {

/// Region ids of the planted 3-region layout: 0 background, 1 rectangle,
/// 2 L-shape. Sizes scale with the map side.
struct Layout {
  int size = 64;
  nave::Box rectangle;  // inclusive, in map pixels
  std::vector<int> labels;
};

inline Layout three_regions(int size = 64) {
  Layout l;
  l.size = size;
  const auto s = [size](int v) { return v * size / 64; };
  l.rectangle = {s(10), s(8), s(40) - 1, s(28) - 1};
  l.labels.assign(static_cast<std::size_t>(size * size), 0);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      int& v = l.labels[static_cast<std::size_t>(y * size + x)];
      if (x >= l.rectangle.xmin && x <= l.rectangle.xmax && y >= l.rectangle.ymin && y <= l.rectangle.ymax) {
        v = 1;
      } else if ((x >= s(6) && x < s(14) && y >= s(34) && y < s(60)) ||
                 (x >= s(6) && x < s(46) && y >= s(52) && y < s(60))) {
        v = 2;
      }
    }
  }
  return l;
}

/// One tensor per channel count, all at `size` x `size`. Region r carries
/// unit vector e_r in every layer, so regions are orthogonal within each
/// layer. Gaussian noise of standard deviation sigma
/// is added to every activation.
inline nave::ActivationStack planted_stack(const std::vector<int>& labels, int size,
                                           const std::vector<std::size_t>& channels, double sigma,
                                           std::uint64_t seed, const std::string& id = "planted") {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  nave::ActivationStack stack;
  stack.image_id = id;
  stack.source_size = {static_cast<std::size_t>(size), static_cast<std::size_t>(size)};
  for (std::size_t c : channels) {
    nave::TensorRecord t;
    t.shape = {c, static_cast<std::size_t>(size), static_cast<std::size_t>(size)};
    t.data.assign(t.shape.size(), 0.0f);
    const std::size_t n = static_cast<std::size_t>(size * size);
    for (std::size_t ch = 0; ch < c; ++ch) {
      for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<std::size_t>(labels[i]);
        const double base = (ch == r % c) ? 1.0 : 0.0;
        t.data[ch * n + i] = static_cast<float>(base + noise(gen));
      }
    }
    stack.layers.push_back(std::move(t));
  }
  return stack;
}

/// Random tensor with standard normal entries.
inline nave::TensorRecord random_tensor(std::size_t c, std::size_t h, std::size_t w, std::mt19937_64& gen) {
  std::normal_distribution<float> dist(0.0f, 1.0f);
  nave::TensorRecord t;
  t.shape = {c, h, w};
  t.data.resize(t.shape.size());
  for (float& v : t.data) v = dist(gen);
  return t;
}

inline nave::Matrix to_matrix(const std::vector<std::vector<double>>& rows) {
  nave::Matrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < m.cols; ++c) m(r, c) = rows[r][c];
  return m;
}

inline std::vector<std::vector<double>> random_rows(std::size_t n, std::size_t dim, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> rows(n, std::vector<double>(dim));
  for (auto& r : rows)
    for (double& v : r) v = u(gen);
  return rows;
}

}  // namespace synth
