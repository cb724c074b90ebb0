#include "nave/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nave/error.hpp"

namespace nave {
namespace {

constexpr Rgb kPalette[20] = {
    {31, 119, 180},  {255, 127, 14},  {44, 160, 44},   {214, 39, 40},   {148, 103, 189},
    {140, 86, 75},   {227, 119, 194}, {127, 127, 127}, {188, 189, 34},  {23, 190, 207},
    {174, 199, 232}, {255, 187, 120}, {152, 223, 138}, {255, 152, 150}, {197, 176, 213},
    {196, 156, 148}, {247, 182, 210}, {199, 199, 199}, {219, 219, 141}, {158, 218, 229},
};

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

}  // namespace

std::span<const Rgb> default_palette() { return kPalette; }

std::vector<int> upsample_labels_nearest(std::span<const int> labels, std::size_t in_h, std::size_t in_w,
                                         std::size_t out_h, std::size_t out_w) {
  if (labels.size() != in_h * in_w) throw ArgumentError("upsample_labels_nearest: size mismatch");
  std::vector<int> out(out_h * out_w);
  for (std::size_t y = 0; y < out_h; ++y) {
    const std::size_t sy = y * in_h / out_h;
    for (std::size_t x = 0; x < out_w; ++x) {
      out[y * out_w + x] = labels[sy * in_w + x * in_w / out_w];
    }
  }
  return out;
}

RgbImage render_labels(const ExplanationMap& map, std::span<const Rgb> palette,
                       const LabelRenderOptions& options) {
  map.validate();
  if (palette.empty()) throw ArgumentError("render_labels: empty palette");
  const std::size_t h = map.source_size.height ? map.source_size.height : map.height;
  const std::size_t w = map.source_size.width ? map.source_size.width : map.width;
  const auto up = upsample_labels_nearest(map.labels, map.height, map.width, h, w);
  RgbImage img(h, w);
  for (std::size_t i = 0; i < up.size(); ++i) {
    const Rgb c = (options.highlight && up[i] != *options.highlight)
                      ? kMaskGray
                      : palette[static_cast<std::size_t>(up[i]) % palette.size()];
    std::copy(c.begin(), c.end(), img.pixels.begin() + static_cast<std::ptrdiff_t>(3 * i));
  }
  return img;
}

RgbImage render_pca(const Matrix& projected, std::size_t map_height, std::size_t map_width,
                    std::size_t out_height, std::size_t out_width) {
  if (projected.cols != 3) throw ArgumentError("render_pca: expected 3 projected components");
  if (projected.rows != map_height * map_width) throw ArgumentError("render_pca: row count mismatch");
  std::array<double, 3> lo, hi;
  lo.fill(std::numeric_limits<double>::infinity());
  hi.fill(-std::numeric_limits<double>::infinity());
  for (std::size_t r = 0; r < projected.rows; ++r) {
    for (std::size_t c = 0; c < 3; ++c) {
      lo[c] = std::min(lo[c], projected(r, c));
      hi[c] = std::max(hi[c], projected(r, c));
    }
  }
  std::vector<Rgb> colors(projected.rows);
  for (std::size_t r = 0; r < projected.rows; ++r) {
    for (std::size_t c = 0; c < 3; ++c) {
      colors[r][c] = hi[c] > lo[c] ? to_byte(255.0 * (projected(r, c) - lo[c]) / (hi[c] - lo[c])) : 0;
    }
  }
  RgbImage img(out_height, out_width);
  for (std::size_t y = 0; y < out_height; ++y) {
    const std::size_t sy = y * map_height / out_height;
    for (std::size_t x = 0; x < out_width; ++x) {
      const Rgb& c = colors[sy * map_width + x * map_width / out_width];
      std::copy(c.begin(), c.end(), img.at(y, x));
    }
  }
  return img;
}

RgbImage average_color_visualization(const RgbImage& image, std::span<const ExplanationMap> maps) {
  if (maps.empty()) throw ArgumentError("average_color_visualization: no maps");
  const std::size_t n = image.height * image.width;
  std::vector<double> acc(3 * n, 0.0);
  for (const ExplanationMap& map : maps) {
    map.validate();
    if (map.source_size.height != image.height || map.source_size.width != image.width) {
      throw ArgumentError("average_color_visualization: map '" + map.image_id + "' explains a " +
                          std::to_string(map.source_size.height) + "x" +
                          std::to_string(map.source_size.width) + " image, got " +
                          std::to_string(image.height) + "x" + std::to_string(image.width));
    }
    const auto up = upsample_labels_nearest(map.labels, map.height, map.width, image.height, image.width);
    std::vector<std::array<double, 3>> sum(map.k, {0.0, 0.0, 0.0});
    std::vector<double> count(map.k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto l = static_cast<std::size_t>(up[i]);
      for (int c = 0; c < 3; ++c) sum[l][c] += image.pixels[3 * i + c];
      count[l] += 1.0;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const auto l = static_cast<std::size_t>(up[i]);
      for (int c = 0; c < 3; ++c) acc[3 * i + c] += sum[l][c] / count[l];
    }
  }
  RgbImage out(image.height, image.width);
  const double inv = 1.0 / static_cast<double>(maps.size());
  for (std::size_t i = 0; i < 3 * n; ++i) out.pixels[i] = to_byte(acc[i] * inv);
  return out;
}

}  // namespace nave
