#include "nave/features.hpp"

#include <algorithm>
#include <cmath>

#include "nave/error.hpp"

namespace nave {
namespace {

struct Tap {
  std::size_t lo;
  std::size_t hi;
  double frac;  // weight of hi
};

// Source taps for every output index along one axis.
std::vector<Tap> axis_taps(std::size_t in, std::size_t out) {
  std::vector<Tap> taps(out);
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  for (std::size_t i = 0; i < out; ++i) {
    double src = (static_cast<double>(i) + 0.5) * scale - 0.5;
    src = std::clamp(src, 0.0, static_cast<double>(in - 1));
    const auto lo = static_cast<std::size_t>(std::floor(src));
    const std::size_t hi = std::min(lo + 1, in - 1);
    taps[i] = {lo, hi, src - static_cast<double>(lo)};
  }
  return taps;
}

}  // namespace

TensorRecord upsample_bilinear(const TensorRecord& t, Resolution target) {
  t.validate();
  if (target.height < 1 || target.width < 1) {
    throw ArgumentError("upsample_bilinear: target resolution must be >= 1x1");
  }
  const Shape3 s = t.shape;
  TensorRecord out;
  out.shape = {s.channels, target.height, target.width};
  if (target.height == s.height && target.width == s.width) {
    out.data = t.data;
    return out;
  }
  out.data.resize(out.shape.size());
  const auto ys = axis_taps(s.height, target.height);
  const auto xs = axis_taps(s.width, target.width);
  for (std::size_t c = 0; c < s.channels; ++c) {
    const float* src = t.data.data() + c * s.height * s.width;
    float* dst = out.data.data() + c * target.height * target.width;
    for (std::size_t y = 0; y < target.height; ++y) {
      const Tap& ty = ys[y];
      const float* r0 = src + ty.lo * s.width;
      const float* r1 = src + ty.hi * s.width;
      for (std::size_t x = 0; x < target.width; ++x) {
        const Tap& tx = xs[x];
        const double top = r0[tx.lo] + (r0[tx.hi] - static_cast<double>(r0[tx.lo])) * tx.frac;
        const double bot = r1[tx.lo] + (r1[tx.hi] - static_cast<double>(r1[tx.lo])) * tx.frac;
        dst[y * target.width + x] = static_cast<float>(top + (bot - top) * ty.frac);
      }
    }
  }
  return out;
}

std::vector<std::size_t> resolve_selection(const PipelineConfig& cfg, std::size_t layer_count) {
  if (layer_count == 0) throw ArgumentError("activation stack has no layers");
  if (cfg.layer_selection.empty()) {
    std::vector<std::size_t> all(layer_count);
    for (std::size_t i = 0; i < layer_count; ++i) all[i] = i;
    return all;
  }
  for (std::size_t i = 0; i < cfg.layer_selection.size(); ++i) {
    if (cfg.layer_selection[i] >= layer_count) {
      throw ArgumentError("layer selection index " + std::to_string(cfg.layer_selection[i]) +
                          " out of range (stack has " + std::to_string(layer_count) + " layers)");
    }
    if (i > 0 && cfg.layer_selection[i] <= cfg.layer_selection[i - 1]) {
      throw ArgumentError("layer selection must be strictly increasing");
    }
  }
  return cfg.layer_selection;
}

Resolution resolve_resolution(const PipelineConfig& cfg, const ActivationStack& stack) {
  if (cfg.target_resolution) {
    if (cfg.target_resolution->height < 1 || cfg.target_resolution->width < 1) {
      throw ArgumentError("target resolution must be >= 1x1");
    }
    return *cfg.target_resolution;
  }
  const auto sel = resolve_selection(cfg, stack.layers.size());
  const Shape3& first = stack.layers[sel.front()].shape;
  return {first.height, first.width};
}

FeatureMatrix build_features(const ActivationStack& stack, const PipelineConfig& cfg) {
  const auto selection = resolve_selection(cfg, stack.layers.size());
  const Resolution res = resolve_resolution(cfg, stack);

  FeatureMatrix fm;
  fm.resolution = res;
  std::size_t dim = 0;
  for (std::size_t j : selection) {
    const std::size_t c = stack.layers[j].shape.channels;
    fm.layer_offsets.push_back({dim, c});
    dim += c;
  }
  const std::size_t n = res.height * res.width;
  fm.rows = Matrix(n, dim);

  for (std::size_t b = 0; b < selection.size(); ++b) {
    const TensorRecord up = upsample_bilinear(stack.layers[selection[b]], res);
    const LayerBlock blk = fm.layer_offsets[b];
    const double scale = 1.0 / (1.0 + static_cast<double>(blk.length));
    for (std::size_t r = 0; r < n; ++r) {
      auto row = fm.rows.row(r).subspan(blk.start, blk.length);
      double sq = 0.0;
      for (std::size_t c = 0; c < blk.length; ++c) {
        row[c] = up.data[c * n + r];
        sq += row[c] * row[c];
      }
      if (sq == 0.0) {
        ++fm.zero_blocks;
        continue;
      }
      const double f = scale / std::sqrt(sq);
      for (double& v : row) v *= f;
    }
  }
  return fm;
}

}  // namespace nave
