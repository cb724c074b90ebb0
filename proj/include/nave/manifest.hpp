#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nave/tensor_io.hpp"

namespace nave {

/// Pixel size of an original image.
struct ImageSize {
  std::size_t height = 0;
  std::size_t width = 0;
  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

/// One image's activations, shallow layer first.
struct ActivationStack {
  std::string image_id;
  std::vector<TensorRecord> layers;
  ImageSize source_size;
};

struct ManifestEntry {
  std::string image_id;
  ImageSize source_size;
  std::vector<std::filesystem::path> layers;  // resolved against the manifest directory
  std::optional<std::filesystem::path> image;
};

struct Manifest {
  std::vector<std::string> layer_names;
  std::vector<ManifestEntry> entries;
  /// Per-layer channel counts shared by every entry.
  std::vector<std::size_t> channels;

  std::size_t layer_count() const { return channels.size(); }
  /// Index of the entry with this id; throws ArgumentError when absent.
  std::size_t find(const std::string& image_id) const;
};

/// Inclusive integer pixel corners.
struct Box {
  int xmin = 0;
  int ymin = 0;
  int xmax = 0;
  int ymax = 0;

  int width() const { return xmax - xmin + 1; }
  int height() const { return ymax - ymin + 1; }
  long long area() const { return static_cast<long long>(width()) * height(); }
  friend bool operator==(const Box&, const Box&) = default;
};

struct BoxAnnotation {
  std::string image_id;
  std::vector<Box> boxes;
};

/// Parses and validates a manifest document. Relative tensor and image paths
/// are resolved against `base_dir`. Tensor headers are read to check that
/// every entry exposes the same per-layer channel counts.
Manifest parse_manifest(const std::string& json_text, const std::filesystem::path& base_dir,
                        const std::string& origin = "<manifest>");
Manifest load_manifest(const std::filesystem::path& path);

std::vector<BoxAnnotation> parse_annotations(const std::string& json_text,
                                             const std::string& origin = "<annotations>");
std::vector<BoxAnnotation> load_annotations(const std::filesystem::path& path);

/// Checks every box against the source size of its manifest entry.
/// Annotations for images absent from the manifest are ignored.
void validate_annotations(const std::vector<BoxAnnotation>& annotations, const Manifest& manifest);

/// Reads all tensors of one manifest entry.
ActivationStack load_stack(const Manifest& manifest, std::size_t entry_index);

/// Serializes a manifest back to the interchange JSON, with paths written
/// relative to `base_dir` when possible.
std::string manifest_to_json(const Manifest& manifest, const std::filesystem::path& base_dir);

}  // namespace nave
