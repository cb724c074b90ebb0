#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nave/label_map.hpp"
#include "nave/manifest.hpp"

namespace nave {

enum class Connectivity { kFour = 4, kEight = 8 };
enum class BoxStrategy { kInner, kOuter };

const char* to_string(BoxStrategy s);
BoxStrategy parse_strategy(const std::string& s);
Connectivity parse_connectivity(int n);

struct Pixel {
  int row = 0;
  int col = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

/// Maximal connected set of equally-labelled sites.
struct Component {
  int label = 0;
  std::vector<Pixel> pixels;  // raster order
  std::size_t area() const { return pixels.size(); }
};

/// Partition of the map into components, ordered by the raster position of
/// each component's first pixel.
std::vector<Component> connected_components(const ExplanationMap& map,
                                            Connectivity connectivity = Connectivity::kFour);

/// Tight bounding box of a pixel set.
Box outer_box(std::span<const Pixel> mask);

/// Box centered on the per-axis median of the pixel coordinates, with each
/// half-extent the distance from the median to the nearer extreme along that
/// axis. An even-count median is the floored mean of the two middle values.
/// Corners are clipped to [0, width-1] x [0, height-1].
Box inner_box(std::span<const Pixel> mask, ImageSize bounds);

/// Intersection over union with inclusive pixel areas.
double iou(const Box& a, const Box& b);

/// Maps a box from map resolution to source pixels: min corners floor,
/// max corners cover the full source extent of the last map pixel.
Box scale_box(const Box& box, std::size_t map_height, std::size_t map_width, ImageSize source);

struct ImageLocalization {
  std::string image_id;
  double best_iou = 0.0;
  Box box;                 // chosen component's box, source pixels
  std::size_t gt_index = 0;
  std::size_t component = 0;  // index into connected_components()
  int label = 0;
  bool correct = false;
};

struct LocalizationReport {
  std::vector<ImageLocalization> per_image;
  double corloc = 0.0;
  std::size_t n_images = 0;
  BoxStrategy strategy = BoxStrategy::kInner;
  /// Maps without a usable annotation; excluded from n_images.
  std::vector<std::string> skipped;
};

struct EvalOptions {
  BoxStrategy strategy = BoxStrategy::kInner;
  Connectivity connectivity = Connectivity::kFour;
  double threshold = 0.5;
};

/// Best IoU per image over every component of every label against every
/// ground-truth box; CorLoc is the fraction of images reaching the threshold.
LocalizationReport evaluate(std::span<const ExplanationMap> maps,
                            std::span<const BoxAnnotation> annotations, const EvalOptions& options = {});

std::string report_to_json(const LocalizationReport& report);
std::string report_to_csv(const LocalizationReport& report);

}  // namespace nave
