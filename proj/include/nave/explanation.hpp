#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nave/features.hpp"
#include "nave/image_io.hpp"
#include "nave/label_map.hpp"
#include "nave/localization.hpp"
#include "nave/manifest.hpp"
#include "nave/model_io.hpp"

namespace nave {

enum class Backend { kKMeans, kWard, kPca };

const char* to_string(Backend b);
Backend parse_backend(const std::string& s);

struct ExplainOptions {
  Backend backend = Backend::kKMeans;
  std::size_t k = 5;
  std::uint64_t seed = 0;
  std::size_t restarts = 1;
  std::size_t max_iter = 300;
  double tol = 1e-4;
  /// Row cap for Ward fits; larger inputs are strided-subsampled.
  std::size_t ward_row_cap = kWardRowCap;
};

std::string model_id(const ExplainOptions& options);

/// Labels for feature rows under an already fitted model.
std::vector<int> predict_labels(const ClusterModel& model, const Matrix& rows);

/// Fits one model on this image's rows and labels its sites.
ExplanationMap explain_image(const ActivationStack& stack, const PipelineConfig& cfg,
                             const ExplainOptions& options);

struct ClassExplanation {
  ClusterModel model;
  std::vector<ExplanationMap> maps;
};

/// Fits one model over the concatenated rows of every stack, then labels each
/// image with it so cluster ids mean the same thing across images.
ClassExplanation explain_class(std::span<const ActivationStack> stacks, const PipelineConfig& cfg,
                               const ExplainOptions& options);

/// Loads the listed manifest entries (all of them when `image_ids` is empty)
/// and runs the class-wise explanation.
ClassExplanation explain_class(const Manifest& manifest, std::span<const std::string> image_ids,
                               const PipelineConfig& cfg, const ExplainOptions& options);

/// Labels one image with a previously fitted model.
ExplanationMap explain_with_model(const ActivationStack& stack, const PipelineConfig& cfg,
                                  const ClusterModel& model, const std::string& model_name);

struct ConceptPatch {
  std::string image_id;
  Box map_box;     // map resolution
  Box source_box;  // source pixels
  std::size_t area = 0;  // component area at map resolution
  RgbImage pixels;  // empty when no image was supplied
};

/// Outer boxes of every component of `cluster_id` with at least `min_area`
/// sites, cropped from the matching source image. `images` is either empty or
/// parallel to `maps`.
std::vector<ConceptPatch> extract_concept_patches(std::span<const ExplanationMap> maps, int cluster_id,
                                                  std::span<const RgbImage> images,
                                                  std::size_t min_area = 16,
                                                  Connectivity connectivity = Connectivity::kFour);

}  // namespace nave
