#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "nave/error.hpp"
#include "nave/kmeans.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using nave::KMeansOptions;
using nave::Matrix;

TEST_CASE("separated blobs are recovered exactly") {
  std::vector<std::vector<double>> pts(5, {0.0, 0.0});
  for (int i = 0; i < 5; ++i) pts.push_back({10.0, 10.0});
  const auto m = nave::kmeans_fit(synth::to_matrix(pts), {.k = 2, .seed = 1});
  CHECK(m.inertia == 0.0);
  std::vector<std::vector<double>> c{{m.centroids(0, 0), m.centroids(0, 1)}, {m.centroids(1, 0), m.centroids(1, 1)}};
  std::sort(c.begin(), c.end());
  CHECK(c[0] == std::vector<double>{0.0, 0.0});
  CHECK(c[1] == std::vector<double>{10.0, 10.0});
}

TEST_CASE("K equal to the row count gives zero inertia") {
  std::mt19937_64 gen(5);
  const auto rows = synth::to_matrix(synth::random_rows(7, 3, gen));
  const auto m = nave::kmeans_fit(rows, {.k = 7, .seed = 2});
  CHECK(m.inertia == 0.0);
  auto labels = nave::kmeans_predict(m, rows);
  std::sort(labels.begin(), labels.end());
  for (int i = 0; i < 7; ++i) CHECK(labels[static_cast<std::size_t>(i)] == i);
}

TEST_CASE("restarts never undercut and eventually reach the exhaustive minimum") {
  // Lloyd from k-means++ can stop in a local minimum, so best-of-10 hits the
  // global optimum only on most instances (the acceptance binary scores that
  // rate). Here: no result may beat the brute-force minimum, and with enough
  // restarts every instance reaches it exactly.
  std::mt19937_64 gen(2024);
  for (int inst = 0; inst < 20; ++inst) {
    const auto pts = synth::random_rows(12, 2, gen);
    const double best = oracle::best_two_partition(pts);
    const auto rows = synth::to_matrix(pts);
    const auto ten = nave::kmeans_fit(rows, {.k = 2, .seed = static_cast<std::uint64_t>(inst), .restarts = 10});
    CHECK(ten.inertia >= best - 1e-9);
    const auto many = nave::kmeans_fit(rows, {.k = 2, .seed = static_cast<std::uint64_t>(inst), .restarts = 300});
    CHECK(std::abs(many.inertia - best) <= 1e-9);
    CHECK(many.inertia <= ten.inertia);
  }
}

TEST_CASE("predict uses the nearest centroid and breaks ties low") {
  nave::KMeansModel m;
  m.k = 2;
  m.centroids = Matrix(2, 1);
  m.centroids(1, 0) = 1.0;
  Matrix rows(2, 1);
  rows(0, 0) = 0.4;
  rows(1, 0) = 0.5;
  CHECK(nave::kmeans_predict(m, rows) == std::vector<int>{0, 0});
  Matrix wrong(1, 2);
  CHECK_THROWS_AS(nave::kmeans_predict(m, wrong), nave::ArgumentError);
}

TEST_CASE("predict equals the argmin of the dense distance matrix") {
  std::mt19937_64 gen(8);
  const auto rows = synth::to_matrix(synth::random_rows(1000, 4, gen));
  const auto m = nave::kmeans_fit(rows, {.k = 6, .seed = 3});
  const auto labels = nave::kmeans_predict(m, rows);
  for (std::size_t r = 0; r < rows.rows; ++r) {
    std::vector<double> d(6);
    for (std::size_t c = 0; c < 6; ++c) {
      for (std::size_t j = 0; j < 4; ++j) d[c] += std::pow(rows(r, j) - m.centroids(c, j), 2);
    }
    CHECK(labels[r] == static_cast<int>(std::min_element(d.begin(), d.end()) - d.begin()));
  }
}

TEST_CASE("Lloyd iterations never increase inertia") {
  std::mt19937_64 gen(9);
  for (int t = 0; t < 20; ++t) {
    const auto rows = synth::to_matrix(synth::random_rows(200, 5, gen));
    const auto m = nave::kmeans_fit(rows, {.k = 8, .seed = static_cast<std::uint64_t>(t), .tol = 0.0});
    for (std::size_t i = 1; i < m.inertia_history.size(); ++i) {
      CHECK(m.inertia_history[i] <= m.inertia_history[i - 1] + 1e-9);
    }
    CHECK(m.inertia == doctest::Approx(nave::kmeans_inertia(m, rows)));
    CHECK(m.iterations_run <= 300);
  }
}

TEST_CASE("fits are bitwise deterministic for a seed") {
  std::mt19937_64 gen(10);
  const auto rows = synth::to_matrix(synth::random_rows(300, 6, gen));
  const auto a = nave::kmeans_fit(rows, {.k = 5, .seed = 42, .restarts = 3});
  const auto b = nave::kmeans_fit(rows, {.k = 5, .seed = 42, .restarts = 3});
  CHECK(a.centroids == b.centroids);
  CHECK(a.inertia == b.inertia);
  CHECK(nave::kmeans_predict(a, rows) == nave::kmeans_predict(b, rows));
  for (int l : nave::kmeans_predict(a, rows)) {
    CHECK(l >= 0);
    CHECK(l < 5);
  }
}

TEST_CASE("labels are unchanged by a uniform power-of-two scaling") {
  std::mt19937_64 gen(13);
  for (double s : {0.25, 2.0, 8.0}) {
    const auto rows = synth::to_matrix(synth::random_rows(150, 3, gen));
    Matrix scaled = rows;
    for (double& v : scaled.data) v *= s;
    const auto a = nave::kmeans_fit(rows, {.k = 4, .seed = 77});
    const auto b = nave::kmeans_fit(scaled, {.k = 4, .seed = 77});
    CHECK(nave::kmeans_predict(a, rows) == nave::kmeans_predict(b, scaled));
  }
}

TEST_CASE("identical rows still yield finite centroids") {
  Matrix rows(4, 2, 1.5);
  const auto m = nave::kmeans_fit(rows, {.k = 2, .seed = 0});
  CHECK(m.inertia == 0.0);
  for (double v : m.centroids.data) CHECK(v == 1.5);
}

TEST_CASE("argument errors") {
  Matrix rows(3, 2, 0.0);
  CHECK_THROWS_AS(nave::kmeans_fit(rows, {.k = 4}), nave::ArgumentError);
  CHECK_THROWS_AS(nave::kmeans_fit(rows, {.k = 1}), nave::ArgumentError);
  CHECK_THROWS_AS(nave::kmeans_fit(rows, {.k = 2, .restarts = 0}), nave::ArgumentError);
}
