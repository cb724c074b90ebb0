#include "nave/localization.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include <json.hpp>

#include "nave/error.hpp"

namespace nave {
namespace {

// Floored median of a coordinate list (sorted in place).
int median(std::vector<int>& v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return (v[n / 2 - 1] + v[n / 2]) / 2;  // coordinates are non-negative
}

}  // namespace

const char* to_string(BoxStrategy s) { return s == BoxStrategy::kInner ? "inner" : "outer"; }

BoxStrategy parse_strategy(const std::string& s) {
  if (s == "inner") return BoxStrategy::kInner;
  if (s == "outer") return BoxStrategy::kOuter;
  throw ArgumentError("strategy must be 'inner' or 'outer', got '" + s + "'");
}

Connectivity parse_connectivity(int n) {
  if (n == 4) return Connectivity::kFour;
  if (n == 8) return Connectivity::kEight;
  throw ArgumentError("connectivity must be 4 or 8");
}

std::vector<Component> connected_components(const ExplanationMap& map, Connectivity connectivity) {
  map.validate();
  const int h = static_cast<int>(map.height);
  const int w = static_cast<int>(map.width);
  std::vector<bool> seen(map.labels.size(), false);
  std::vector<Component> out;
  std::vector<Pixel> stack;

  static constexpr int kDr[] = {-1, 1, 0, 0, -1, -1, 1, 1};
  static constexpr int kDc[] = {0, 0, -1, 1, -1, 1, -1, 1};
  const int neighbours = connectivity == Connectivity::kFour ? 4 : 8;

  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const std::size_t idx = static_cast<std::size_t>(r * w + c);
      if (seen[idx]) continue;
      Component comp;
      comp.label = map.labels[idx];
      seen[idx] = true;
      stack.push_back({r, c});
      while (!stack.empty()) {
        const Pixel p = stack.back();
        stack.pop_back();
        comp.pixels.push_back(p);
        for (int n = 0; n < neighbours; ++n) {
          const int rr = p.row + kDr[n];
          const int cc = p.col + kDc[n];
          if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
          const std::size_t j = static_cast<std::size_t>(rr * w + cc);
          if (seen[j] || map.labels[j] != comp.label) continue;
          seen[j] = true;
          stack.push_back({rr, cc});
        }
      }
      std::sort(comp.pixels.begin(), comp.pixels.end(), [](const Pixel& a, const Pixel& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
      });
      out.push_back(std::move(comp));
    }
  }
  return out;
}

Box outer_box(std::span<const Pixel> mask) {
  if (mask.empty()) throw ArgumentError("outer_box: empty mask");
  Box b{mask[0].col, mask[0].row, mask[0].col, mask[0].row};
  for (const Pixel& p : mask) {
    b.xmin = std::min(b.xmin, p.col);
    b.xmax = std::max(b.xmax, p.col);
    b.ymin = std::min(b.ymin, p.row);
    b.ymax = std::max(b.ymax, p.row);
  }
  return b;
}

Box inner_box(std::span<const Pixel> mask, ImageSize bounds) {
  if (mask.empty()) throw ArgumentError("inner_box: empty mask");
  if (bounds.height == 0 || bounds.width == 0) throw ArgumentError("inner_box: empty bounds");
  std::vector<int> xs, ys;
  xs.reserve(mask.size());
  ys.reserve(mask.size());
  for (const Pixel& p : mask) {
    xs.push_back(p.col);
    ys.push_back(p.row);
  }
  const int xc = median(xs);  // sorts xs
  const int yc = median(ys);
  const int xd = std::min(std::abs(xc - xs.front()), std::abs(xc - xs.back()));
  const int yd = std::min(std::abs(yc - ys.front()), std::abs(yc - ys.back()));
  const int wmax = static_cast<int>(bounds.width) - 1;
  const int hmax = static_cast<int>(bounds.height) - 1;
  return {std::clamp(xc - xd, 0, wmax), std::clamp(yc - yd, 0, hmax), std::clamp(xc + xd, 0, wmax),
          std::clamp(yc + yd, 0, hmax)};
}

double iou(const Box& a, const Box& b) {
  const long long iw = std::min(a.xmax, b.xmax) - std::max(a.xmin, b.xmin) + 1;
  const long long ih = std::min(a.ymax, b.ymax) - std::max(a.ymin, b.ymin) + 1;
  const long long inter = (iw > 0 && ih > 0) ? iw * ih : 0;
  const long long uni = a.area() + b.area() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

Box scale_box(const Box& box, std::size_t map_height, std::size_t map_width, ImageSize source) {
  const long long h = static_cast<long long>(map_height), w = static_cast<long long>(map_width);
  const long long sh = static_cast<long long>(source.height), sw = static_cast<long long>(source.width);
  auto lo = [](long long v, long long num, long long den) { return v * num / den; };
  auto hi = [](long long v, long long num, long long den) { return ((v + 1) * num + den - 1) / den - 1; };
  Box out;
  out.xmin = static_cast<int>(std::clamp(lo(box.xmin, sw, w), 0LL, sw - 1));
  out.xmax = static_cast<int>(std::clamp(hi(box.xmax, sw, w), 0LL, sw - 1));
  out.ymin = static_cast<int>(std::clamp(lo(box.ymin, sh, h), 0LL, sh - 1));
  out.ymax = static_cast<int>(std::clamp(hi(box.ymax, sh, h), 0LL, sh - 1));
  return out;
}

LocalizationReport evaluate(std::span<const ExplanationMap> maps,
                            std::span<const BoxAnnotation> annotations, const EvalOptions& options) {
  std::map<std::string, const BoxAnnotation*> by_id;
  for (const BoxAnnotation& a : annotations) by_id[a.image_id] = &a;

  LocalizationReport report;
  report.strategy = options.strategy;
  std::size_t correct = 0;
  for (const ExplanationMap& map : maps) {
    const auto it = by_id.find(map.image_id);
    if (it == by_id.end() || it->second->boxes.empty()) {
      report.skipped.push_back(map.image_id);
      continue;
    }
    const auto& gt = it->second->boxes;
    const auto components = connected_components(map, options.connectivity);
    const ImageSize map_bounds{map.height, map.width};

    ImageLocalization res;
    res.image_id = map.image_id;
    res.best_iou = -1.0;
    for (std::size_t ci = 0; ci < components.size(); ++ci) {
      const Component& comp = components[ci];
      const Box local = options.strategy == BoxStrategy::kInner ? inner_box(comp.pixels, map_bounds)
                                                                : outer_box(comp.pixels);
      const Box box = scale_box(local, map.height, map.width, map.source_size);
      for (std::size_t g = 0; g < gt.size(); ++g) {
        const double v = iou(box, gt[g]);
        if (v > res.best_iou) {
          res.best_iou = v;
          res.box = box;
          res.gt_index = g;
          res.component = ci;
          res.label = comp.label;
        }
      }
    }
    res.correct = res.best_iou >= options.threshold;
    if (res.correct) ++correct;
    report.per_image.push_back(std::move(res));
  }
  report.n_images = report.per_image.size();
  report.corloc = report.n_images == 0 ? 0.0
                                       : static_cast<double>(correct) / static_cast<double>(report.n_images);
  return report;
}

std::string report_to_json(const LocalizationReport& report) {
  nlohmann::json doc;
  doc["corloc"] = report.corloc;
  doc["n_images"] = report.n_images;
  doc["strategy"] = to_string(report.strategy);
  doc["per_image"] = nlohmann::json::array();
  for (const ImageLocalization& r : report.per_image) {
    doc["per_image"].push_back({{"image_id", r.image_id},
                                {"best_iou", r.best_iou},
                                {"box", {r.box.xmin, r.box.ymin, r.box.xmax, r.box.ymax}},
                                {"gt_index", r.gt_index},
                                {"component", r.component},
                                {"label", r.label},
                                {"correct", r.correct}});
  }
  doc["skipped"] = report.skipped;
  return doc.dump(2);
}

std::string report_to_csv(const LocalizationReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "image_id,best_iou,xmin,ymin,xmax,ymax,gt_index,component,label,correct\n";
  for (const ImageLocalization& r : report.per_image) {
    out << r.image_id << ',' << r.best_iou << ',' << r.box.xmin << ',' << r.box.ymin << ','
        << r.box.xmax << ',' << r.box.ymax << ',' << r.gt_index << ',' << r.component << ','
        << r.label << ',' << (r.correct ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace nave
