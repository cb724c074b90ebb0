#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace nave {

/// (channels, height, width) of one layer activation.
struct Shape3 {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t size() const { return channels * height * width; }
  friend bool operator==(const Shape3&, const Shape3&) = default;
};

/// One layer's activation, C-order float32.
struct TensorRecord {
  Shape3 shape;
  std::vector<float> data;

  float at(std::size_t c, std::size_t y, std::size_t x) const {
    return data[(c * shape.height + y) * shape.width + x];
  }

  /// Throws ValidationError if dims are zero, the length is wrong or a value
  /// is not finite.
  void validate() const;

  friend bool operator==(const TensorRecord&, const TensorRecord&) = default;
};

// Tensor files are NPY v1.0 restricted to '<f4', fortran_order False and a
// rank-3 shape. The writer emits the same header layout numpy does, so
// files produced by numpy.save round-trip byte for byte.

TensorRecord read_tensor(const std::filesystem::path& path);

/// Parses only the header; used to validate manifests without loading data.
Shape3 read_tensor_shape(const std::filesystem::path& path);

void write_tensor(const TensorRecord& t, const std::filesystem::path& path);

/// In-memory variants of the above, exposed for tests and tools.
TensorRecord parse_tensor(const std::string& bytes, const std::string& origin = "<memory>");
std::string serialize_tensor(const TensorRecord& t);

}  // namespace nave
