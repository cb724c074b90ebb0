#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace nave {

/// 8-bit RGB, row-major, 3 bytes per pixel.
struct RgbImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> pixels;

  RgbImage() = default;
  RgbImage(std::size_t h, std::size_t w) : height(h), width(w), pixels(h * w * 3, 0) {}

  std::uint8_t* at(std::size_t y, std::size_t x) { return pixels.data() + (y * width + x) * 3; }
  const std::uint8_t* at(std::size_t y, std::size_t x) const {
    return pixels.data() + (y * width + x) * 3;
  }
  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

/// Any PNG color type is converted to 8-bit RGB (alpha is composited away).
RgbImage read_png(const std::filesystem::path& path);
void write_png(const RgbImage& image, const std::filesystem::path& path);

}  // namespace nave
