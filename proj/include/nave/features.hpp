#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "nave/manifest.hpp"
#include "nave/matrix.hpp"
#include "nave/tensor_io.hpp"

namespace nave {

/// Spatial size of an explanation map.
struct Resolution {
  std::size_t height = 0;
  std::size_t width = 0;
  friend bool operator==(const Resolution&, const Resolution&) = default;
};

struct PipelineConfig {
  /// Unset: use the spatial size of the first selected layer.
  std::optional<Resolution> target_resolution;
  /// Strictly increasing layer indices. Empty selects every layer.
  std::vector<std::size_t> layer_selection;
};

struct LayerBlock {
  std::size_t start = 0;
  std::size_t length = 0;  // channel count of the layer
};

/// One row per spatial site (row-major over the map), one column block per
/// selected layer. Each nonzero block has L2 norm 1 / (1 + channels).
struct FeatureMatrix {
  Matrix rows;
  Resolution resolution;
  std::vector<LayerBlock> layer_offsets;
  /// Number of (row, layer) blocks that were all zero and left unnormalized.
  std::size_t zero_blocks = 0;
};

/// Bilinear resize of every channel with half-pixel centers; source
/// coordinates are clamped to the valid range.
TensorRecord upsample_bilinear(const TensorRecord& t, Resolution target);

/// Resolves defaults and checks the selection against a layer count.
/// Returns the effective (explicit) selection.
std::vector<std::size_t> resolve_selection(const PipelineConfig& cfg, std::size_t layer_count);

Resolution resolve_resolution(const PipelineConfig& cfg, const ActivationStack& stack);

FeatureMatrix build_features(const ActivationStack& stack, const PipelineConfig& cfg);

}  // namespace nave
