#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "nave/error.hpp"
#include "nave/localization.hpp"
#include "oracles.hpp"

using nave::Box;
using nave::Connectivity;
using nave::ExplanationMap;

namespace {

ExplanationMap make_map(int h, int w, std::vector<int> labels, int k = 0) {
  ExplanationMap m;
  m.height = static_cast<std::size_t>(h);
  m.width = static_cast<std::size_t>(w);
  m.labels = std::move(labels);
  m.k = k > 0 ? k : *std::max_element(m.labels.begin(), m.labels.end()) + 1;
  m.source_size = {m.height, m.width};
  return m;
}

std::vector<nave::Pixel> mask_pixels(const std::vector<std::uint8_t>& mask, int h, int w) {
  std::vector<nave::Pixel> px;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (mask[static_cast<std::size_t>(y * w + x)]) px.push_back({y, x});
  return px;
}

bool same_box(const Box& b, const oracle::IntBox& o) {
  return b.xmin == o.xmin && b.ymin == o.ymin && b.xmax == o.xmax && b.ymax == o.ymax;
}

// A random blob grown from a seed, so masks range from a few pixels to
// irregular shapes.
std::vector<std::uint8_t> random_mask(int h, int w, std::mt19937_64& gen) {
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(h * w), 0);
  std::uniform_int_distribution<int> ry(0, h - 1), rx(0, w - 1), steps(1, 3 * h * w / 2);
  int y = ry(gen), x = rx(gen);
  const int n = steps(gen);
  for (int s = 0; s < n; ++s) {
    mask[static_cast<std::size_t>(y * w + x)] = 1;
    switch (gen() % 4) {
      case 0: y = std::min(h - 1, y + 1); break;
      case 1: y = std::max(0, y - 1); break;
      case 2: x = std::min(w - 1, x + 1); break;
      default: x = std::max(0, x - 1); break;
    }
  }
  return mask;
}

}  // namespace

TEST_CASE("uniform map is one component") {
  const auto comps = nave::connected_components(make_map(5, 7, std::vector<int>(35, 2), 3));
  REQUIRE(comps.size() == 1);
  CHECK(comps[0].area() == 35);
  CHECK(comps[0].label == 2);
}

TEST_CASE("checkerboard connectivity") {
  std::vector<int> lab(36);
  for (int i = 0; i < 36; ++i) lab[static_cast<std::size_t>(i)] = (i / 6 + i % 6) % 2;
  const auto map = make_map(6, 6, lab);
  CHECK(nave::connected_components(map, Connectivity::kFour).size() == 36);
  CHECK(nave::connected_components(map, Connectivity::kEight).size() == 2);
}

TEST_CASE("components match a union-find partition") {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> lab(256);
    for (int& v : lab) v = static_cast<int>(gen() % 3);
    const auto map = make_map(16, 16, lab, 3);
    for (bool eight : {false, true}) {
      const auto ref = oracle::union_find_components(lab, 16, 16, eight);
      const auto comps = nave::connected_components(map, eight ? Connectivity::kEight : Connectivity::kFour);
      CHECK(comps.size() == std::set<int>(ref.begin(), ref.end()).size());
      std::size_t covered = 0;
      int last_first = -1;
      for (const auto& c : comps) {
        const int first = c.pixels.front().row * 16 + c.pixels.front().col;
        CHECK(first > last_first);  // ordered by first pixel
        last_first = first;
        for (const auto& p : c.pixels) {
          CHECK(ref[static_cast<std::size_t>(p.row * 16 + p.col)] == first);
          CHECK(lab[static_cast<std::size_t>(p.row * 16 + p.col)] == c.label);
        }
        covered += c.area();
      }
      CHECK(covered == 256);
    }
  }
}

TEST_CASE("outer box examples") {
  const std::vector<nave::Pixel> one{{3, 5}};
  CHECK(nave::outer_box(one) == Box{5, 3, 5, 3});
  std::vector<nave::Pixel> full;
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 10; ++x) full.push_back({y, x});
  CHECK(nave::outer_box(full) == Box{0, 0, 9, 9});
}

TEST_CASE("inner box examples") {
  std::vector<nave::Pixel> rect;
  for (int y = 2; y <= 6; ++y)
    for (int x = 1; x <= 9; ++x) rect.push_back({y, x});
  CHECK(nave::inner_box(rect, {20, 20}) == nave::outer_box(rect));

  const std::vector<nave::Pixel> one{{4, 7}};
  CHECK(nave::inner_box(one, {10, 10}) == Box{7, 4, 7, 4});

  // An L along the left column and bottom row of a 10 x 10 grid: the median
  // sits in the corner, so each half-extent is zero.
  std::vector<nave::Pixel> ell;
  for (int y = 0; y < 10; ++y) ell.push_back({y, 0});
  for (int x = 1; x < 10; ++x) ell.push_back({9, x});
  std::sort(ell.begin(), ell.end(), [](auto a, auto b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
  CHECK(nave::inner_box(ell, {10, 10}) == Box{0, 9, 0, 9});
}

TEST_CASE("boxes match the scan oracles on random masks") {
  std::mt19937_64 gen(22);
  for (int trial = 0; trial < 200; ++trial) {
    const int h = 4 + static_cast<int>(gen() % 20), w = 4 + static_cast<int>(gen() % 20);
    const auto mask = random_mask(h, w, gen);
    const auto px = mask_pixels(mask, h, w);
    const Box outer = nave::outer_box(px);
    const Box inner = nave::inner_box(px, {static_cast<std::size_t>(h), static_cast<std::size_t>(w)});
    CHECK(same_box(outer, oracle::scan_outer(mask, h, w)));
    CHECK(same_box(inner, oracle::scan_inner(mask, h, w)));
    CHECK(inner.xmin >= outer.xmin);
    CHECK(inner.ymin >= outer.ymin);
    CHECK(inner.xmax <= outer.xmax);
    CHECK(inner.ymax <= outer.ymax);
  }
}

TEST_CASE("iou") {
  CHECK(nave::iou({0, 0, 9, 9}, {0, 0, 9, 9}) == 1.0);
  CHECK(nave::iou({0, 0, 4, 4}, {5, 5, 9, 9}) == 0.0);
  CHECK(nave::iou({0, 0, 9, 9}, {5, 0, 14, 9}) == doctest::Approx(1.0 / 3.0));
  std::mt19937_64 gen(23);
  std::uniform_int_distribution<int> u(0, 30);
  for (int trial = 0; trial < 200; ++trial) {
    int a0 = u(gen), a1 = u(gen), b0 = u(gen), b1 = u(gen), c0 = u(gen), c1 = u(gen), d0 = u(gen), d1 = u(gen);
    const Box a{std::min(a0, a1), std::min(b0, b1), std::max(a0, a1), std::max(b0, b1)};
    const Box b{std::min(c0, c1), std::min(d0, d1), std::max(c0, c1), std::max(d0, d1)};
    const double ref = oracle::pixel_iou({a.xmin, a.ymin, a.xmax, a.ymax}, {b.xmin, b.ymin, b.xmax, b.ymax});
    CHECK(nave::iou(a, b) == doctest::Approx(ref).epsilon(1e-12));
    CHECK(nave::iou(a, b) == nave::iou(b, a));
  }
}

TEST_CASE("scale_box covers the source extent") {
  CHECK(nave::scale_box({0, 0, 3, 3}, 4, 4, {4, 4}) == Box{0, 0, 3, 3});
  CHECK(nave::scale_box({1, 2, 1, 2}, 4, 4, {8, 16}) == Box{4, 4, 7, 5});
  CHECK(nave::scale_box({0, 0, 2, 2}, 3, 3, {10, 10}) == Box{0, 0, 9, 9});
}

TEST_CASE("evaluate computes CorLoc over annotated images") {
  // "hit": a 5 x 5 object in the top-left of an 8 x 8 map, whose inner and
  // outer boxes coincide. "miss": a 4 x 4 square in the bottom-right; the
  // remaining L-shaped background has inner box (0,0)-(4,4), which covers
  // only 36% of the (0,0)-(5,5) source box it is scored against.
  std::vector<int> hit(64, 0), miss(64, 0);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 5; ++x) hit[static_cast<std::size_t>(y * 8 + x)] = 1;
  for (int y = 4; y < 8; ++y)
    for (int x = 4; x < 8; ++x) miss[static_cast<std::size_t>(y * 8 + x)] = 1;

  std::vector<ExplanationMap> maps{make_map(8, 8, hit), make_map(8, 8, hit), make_map(8, 8, miss),
                                   make_map(8, 8, hit)};
  maps[0].image_id = "a";
  maps[1].image_id = "b";
  maps[2].image_id = "c";
  maps[3].image_id = "unannotated";
  // Source is twice the map size; boxes are in source pixels.
  for (auto& m : maps) m.source_size = {16, 16};
  const std::vector<nave::BoxAnnotation> ann{{"a", {{0, 0, 9, 9}}},
                                             {"b", {{12, 12, 15, 15}, {0, 0, 9, 9}}},
                                             {"c", {{0, 0, 5, 5}}}};
  const auto rep = nave::evaluate(maps, ann);
  CHECK(rep.n_images == 3);
  CHECK(rep.skipped == std::vector<std::string>{"unannotated"});
  CHECK(rep.corloc == doctest::Approx(2.0 / 3.0));
  REQUIRE(rep.per_image.size() == 3);
  CHECK(rep.per_image[0].best_iou == 1.0);
  CHECK(rep.per_image[0].box == Box{0, 0, 9, 9});
  CHECK(rep.per_image[1].gt_index == 1);
  CHECK(rep.per_image[1].correct);
  CHECK(rep.per_image[2].best_iou == doctest::Approx(0.36));
  CHECK_FALSE(rep.per_image[2].correct);

  // The outer box of the background spans the whole source image.
  nave::EvalOptions outer;
  outer.strategy = nave::BoxStrategy::kOuter;
  const auto rep_outer = nave::evaluate(maps, ann, outer);
  CHECK(rep_outer.per_image[2].best_iou == doctest::Approx(36.0 / 256.0));

  const std::vector<ExplanationMap> hits{maps[0], maps[1]};
  CHECK(nave::evaluate(hits, ann).corloc == 1.0);
  const std::vector<ExplanationMap> misses{maps[2]};
  CHECK(nave::evaluate(misses, ann).corloc == 0.0);

  CHECK(nave::report_to_json(rep).find("\"corloc\"") != std::string::npos);
  CHECK(nave::report_to_csv(rep).find("image_id") == 0);
}

TEST_CASE("strategy and connectivity parsing") {
  CHECK(nave::parse_strategy("outer") == nave::BoxStrategy::kOuter);
  CHECK(nave::parse_strategy("inner") == nave::BoxStrategy::kInner);
  CHECK_THROWS_AS(nave::parse_strategy("middle"), nave::ArgumentError);
  CHECK(nave::parse_connectivity(8) == Connectivity::kEight);
  CHECK_THROWS_AS(nave::parse_connectivity(6), nave::ArgumentError);
}
