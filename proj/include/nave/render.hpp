#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>

#include "nave/image_io.hpp"
#include "nave/label_map.hpp"
#include "nave/matrix.hpp"

namespace nave {

using Rgb = std::array<std::uint8_t, 3>;

/// Fixed 20-color palette: the 10 tab10 colors followed by their light
/// tab20 companions. Label i uses entry i % 20.
std::span<const Rgb> default_palette();

/// Nearest-neighbour resize of a label grid (source index floor(i * in / out)).
std::vector<int> upsample_labels_nearest(std::span<const int> labels, std::size_t in_h, std::size_t in_w,
                                         std::size_t out_h, std::size_t out_w);

struct LabelRenderOptions {
  /// When set, every other label is drawn in kMaskGray.
  std::optional<int> highlight;
};
inline constexpr Rgb kMaskGray{128, 128, 128};

/// Palette render of a map, NN-upsampled to the map's source size.
RgbImage render_labels(const ExplanationMap& map, std::span<const Rgb> palette = default_palette(),
                       const LabelRenderOptions& options = {});

/// RGB render of a 3-column projection (rows in map raster order). Each
/// channel is min-max scaled to [0, 255] independently; a constant channel
/// renders as 0.
RgbImage render_pca(const Matrix& projected, std::size_t map_height, std::size_t map_width,
                    std::size_t out_height, std::size_t out_width);

/// Replaces every pixel with the mean image color of its segment, then
/// averages these per-map renders pixel-wise.
RgbImage average_color_visualization(const RgbImage& image, std::span<const ExplanationMap> maps);

}  // namespace nave
