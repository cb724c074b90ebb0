#include <doctest.h>

#include <random>
#include <set>

#include "nave/error.hpp"
#include "nave/explanation.hpp"
#include "nave/metrics.hpp"
#include "synthetic.hpp"

using nave::Backend;
using nave::ExplainOptions;

namespace {

ExplainOptions opts(Backend b, std::size_t k, std::uint64_t seed = 0) {
  ExplainOptions o;
  o.backend = b;
  o.k = k;
  o.seed = seed;
  return o;
}

}  // namespace

TEST_CASE("adjusted rand index") {
  const std::vector<int> a{0, 0, 1, 1, 2, 2};
  CHECK(nave::adjusted_rand_index(a, a) == doctest::Approx(1.0));
  // Relabeling does not matter.
  CHECK(nave::adjusted_rand_index(a, std::vector<int>{5, 5, 3, 3, 0, 0}) == doctest::Approx(1.0));
  // Hand-computed: (1 - 1/3) / (3/2 - 1/3) = 4/7.
  CHECK(nave::adjusted_rand_index(std::vector<int>{0, 0, 1, 1}, std::vector<int>{0, 0, 1, 2}) ==
        doctest::Approx(0.5714285714));
  CHECK(nave::adjusted_rand_index(std::vector<int>{0, 0, 0}, std::vector<int>{1, 1, 1}) == 1.0);
  CHECK(nave::adjusted_rand_index(std::vector<int>{0, 0, 1, 1}, std::vector<int>{0, 1, 0, 1}) ==
        doctest::Approx(-0.5));
}

TEST_CASE("two planted halves separate into two labels") {
  std::vector<int> truth(64);
  for (int i = 0; i < 64; ++i) truth[static_cast<std::size_t>(i)] = (i % 8) < 4 ? 0 : 1;
  const auto stack = synth::planted_stack(truth, 8, {4}, 0.01, 1);
  const auto map = nave::explain_image(stack, {}, opts(Backend::kKMeans, 2));
  CHECK(map.height == 8);
  CHECK(map.k == 2);
  CHECK(map.model_id == "kmeans-k2-seed0");
  CHECK(nave::adjusted_rand_index(map.labels, truth) == 1.0);
}

TEST_CASE("three planted regions are recovered") {
  const auto layout = synth::three_regions(32);
  const auto stack = synth::planted_stack(layout.labels, 32, {4, 16, 64}, 0.01, 2);
  for (Backend b : {Backend::kKMeans, Backend::kWard}) {
    const auto map = nave::explain_image(stack, {}, opts(b, 3));
    CHECK(nave::adjusted_rand_index(map.labels, layout.labels) >= 0.99);
  }
}

TEST_CASE("invalid K is rejected") {
  const auto layout = synth::three_regions(16);
  const auto stack = synth::planted_stack(layout.labels, 16, {4}, 0.01, 3);
  CHECK_THROWS_AS(nave::explain_image(stack, {}, opts(Backend::kKMeans, 1)), nave::ArgumentError);
  CHECK_THROWS_AS(nave::explain_image(stack, {}, opts(Backend::kWard, 0)), nave::ArgumentError);
}

TEST_CASE("class fit labels identical images identically") {
  const auto layout = synth::three_regions(16);
  const auto s = synth::planted_stack(layout.labels, 16, {8}, 0.05, 4, "a");
  auto t = s;
  t.image_id = "b";
  const std::vector<nave::ActivationStack> stacks{s, t};
  const auto res = nave::explain_class(stacks, {}, opts(Backend::kKMeans, 3));
  REQUIRE(res.maps.size() == 2);
  CHECK(res.maps[0].labels == res.maps[1].labels);
  CHECK(res.maps[1].image_id == "b");
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(nave::explain_with_model(stacks[i], {}, res.model, res.maps[i].model_id).labels == res.maps[i].labels);
  }
}

TEST_CASE("class fit on one image equals the per-image fit") {
  const auto layout = synth::three_regions(16);
  const auto s = synth::planted_stack(layout.labels, 16, {4, 8}, 0.2, 5);
  for (Backend b : {Backend::kKMeans, Backend::kWard, Backend::kPca}) {
    const auto single = nave::explain_image(s, {}, opts(b, 3, 9));
    const std::vector<nave::ActivationStack> one{s};
    CHECK(nave::explain_class(one, {}, opts(b, 3, 9)).maps[0].labels == single.labels);
  }
}

TEST_CASE("cluster ids agree across planted images") {
  const auto layout = synth::three_regions(16);
  std::vector<nave::ActivationStack> stacks;
  for (int i = 0; i < 20; ++i)
    stacks.push_back(synth::planted_stack(layout.labels, 16, {8}, 0.05, 100 + static_cast<std::uint64_t>(i)));
  const auto res = nave::explain_class(stacks, {}, opts(Backend::kKMeans, 3));
  for (const auto& m : res.maps) CHECK(m.labels == res.maps[0].labels);
  CHECK(nave::adjusted_rand_index(res.maps[0].labels, layout.labels) == 1.0);
}

TEST_CASE("ward above the row cap subsamples deterministically") {
  const auto layout = synth::three_regions(16);
  const auto s = synth::planted_stack(layout.labels, 16, {4}, 0.01, 6);
  auto o = opts(Backend::kWard, 3);
  o.ward_row_cap = 64;
  const auto a = nave::explain_image(s, {}, o);
  CHECK(a.labels == nave::explain_image(s, {}, o).labels);
  CHECK(nave::adjusted_rand_index(a.labels, layout.labels) >= 0.99);
}

TEST_CASE("pca backend labels stay below K") {
  std::mt19937_64 gen(7);
  nave::ActivationStack s{"r", {synth::random_tensor(16, 8, 8, gen)}, {8, 8}};
  for (std::size_t k = 2; k <= 6; ++k) {
    const auto map = nave::explain_image(s, {}, opts(Backend::kPca, k));
    const std::set<int> used(map.labels.begin(), map.labels.end());
    CHECK(*used.rbegin() < static_cast<int>(k));
  }
}

TEST_CASE("heterogeneous stacks are rejected") {
  std::mt19937_64 gen(8);
  nave::ActivationStack a{"a", {synth::random_tensor(4, 4, 4, gen)}, {4, 4}};
  nave::ActivationStack b{"b", {synth::random_tensor(5, 4, 4, gen)}, {4, 4}};
  const std::vector<nave::ActivationStack> both{a, b};
  CHECK_THROWS_AS(nave::explain_class(both, {}, opts(Backend::kKMeans, 2)), nave::ValidationError);
}

TEST_CASE("backend names") {
  CHECK(nave::parse_backend("ward") == Backend::kWard);
  CHECK(std::string(nave::to_string(Backend::kPca)) == "pca");
  CHECK_THROWS_AS(nave::parse_backend("dbscan"), nave::ArgumentError);
  CHECK(nave::model_id(opts(Backend::kKMeans, 5)) == "kmeans-k5-seed0");
}

TEST_CASE("pca backend label count never drops as k grows on planted data") {
  const auto layout = synth::three_regions(32);
  const auto s = synth::planted_stack(layout.labels, 32, {8, 16}, 0.01, 9);
  std::size_t prev = 0;
  for (std::size_t k = 2; k <= 6; ++k) {
    const auto map = nave::explain_image(s, {}, opts(Backend::kPca, k));
    const std::set<int> used(map.labels.begin(), map.labels.end());
    CHECK(used.size() <= k);
    CHECK(used.size() >= prev);
    prev = used.size();
  }
}
