#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "nave/manifest.hpp"

namespace nave {

/// Per-site cluster labels of one image at map resolution.
struct ExplanationMap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<int> labels;  // row-major, values in [0, k)
  std::size_t k = 0;
  std::string image_id;
  std::string model_id;
  /// Size of the original image the map explains.
  ImageSize source_size;

  int at(std::size_t y, std::size_t x) const { return labels[y * width + x]; }

  /// Throws ArgumentError when sizes or label bounds are violated.
  void validate() const;
};

}  // namespace nave
