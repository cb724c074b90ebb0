#include "nave/explanation.hpp"

#include <numeric>

#include "nave/error.hpp"

namespace nave {
namespace {

ClusterModel fit_model(const Matrix& rows, const ExplainOptions& o, std::vector<int>* labels) {
  switch (o.backend) {
    case Backend::kKMeans: {
      KMeansModel m = kmeans_fit(rows, {o.k, o.seed, o.max_iter, o.tol, o.restarts});
      *labels = kmeans_predict(m, rows);
      return m;
    }
    case Backend::kWard: {
      if (rows.rows <= o.ward_row_cap) {
        WardModel m = ward_fit(rows, o.k);
        *labels = m.labels;
        return m;
      }
      const auto idx = strided_subsample(rows.rows, o.ward_row_cap);
      WardModel m = ward_fit(select_rows(rows, idx), o.k);
      *labels = ward_predict(m, rows);
      for (std::size_t i = 0; i < idx.size(); ++i) (*labels)[idx[i]] = m.labels[i];
      return m;
    }
    case Backend::kPca: {
      PcaModel m = pca_fit(rows, o.k);
      *labels = pca_labels(pca_project(m, rows));
      return m;
    }
  }
  throw ArgumentError("unknown backend");
}

void check_homogeneous(std::span<const ActivationStack> stacks) {
  const ActivationStack& first = stacks.front();
  for (const ActivationStack& s : stacks) {
    if (s.layers.size() != first.layers.size()) {
      throw ValidationError("stack '" + s.image_id + "' has " + std::to_string(s.layers.size()) +
                            " layers, expected " + std::to_string(first.layers.size()));
    }
    for (std::size_t j = 0; j < s.layers.size(); ++j) {
      if (s.layers[j].shape.channels != first.layers[j].shape.channels) {
        throw ValidationError("stack '" + s.image_id + "' layer " + std::to_string(j) + " has " +
                              std::to_string(s.layers[j].shape.channels) + " channels, expected " +
                              std::to_string(first.layers[j].shape.channels));
      }
    }
  }
}

ExplanationMap make_map(const ActivationStack& stack, const FeatureMatrix& fm, std::vector<int> labels,
                        std::size_t k, const std::string& model_name) {
  ExplanationMap map;
  map.height = fm.resolution.height;
  map.width = fm.resolution.width;
  map.labels = std::move(labels);
  map.k = k;
  map.image_id = stack.image_id;
  map.model_id = model_name;
  map.source_size = stack.source_size;
  return map;
}

std::size_t model_k(const ClusterModel& model) {
  if (const auto* km = std::get_if<KMeansModel>(&model)) return km->k;
  if (const auto* wd = std::get_if<WardModel>(&model)) return wd->cut_k;
  return std::get<PcaModel>(model).k();
}

}  // namespace

const char* to_string(Backend b) {
  switch (b) {
    case Backend::kKMeans:
      return "kmeans";
    case Backend::kWard:
      return "ward";
    case Backend::kPca:
      return "pca";
  }
  return "?";
}

Backend parse_backend(const std::string& s) {
  if (s == "kmeans") return Backend::kKMeans;
  if (s == "ward") return Backend::kWard;
  if (s == "pca") return Backend::kPca;
  throw ArgumentError("backend must be one of kmeans, ward, pca; got '" + s + "'");
}

std::string model_id(const ExplainOptions& o) {
  std::string id = std::string(to_string(o.backend)) + "-k" + std::to_string(o.k);
  if (o.backend == Backend::kKMeans) id += "-seed" + std::to_string(o.seed);
  return id;
}

std::vector<int> predict_labels(const ClusterModel& model, const Matrix& rows) {
  if (const auto* km = std::get_if<KMeansModel>(&model)) return kmeans_predict(*km, rows);
  if (const auto* wd = std::get_if<WardModel>(&model)) return ward_predict(*wd, rows);
  return pca_labels(pca_project(std::get<PcaModel>(model), rows));
}

ExplanationMap explain_image(const ActivationStack& stack, const PipelineConfig& cfg,
                             const ExplainOptions& options) {
  ClassExplanation ce = explain_class(std::span<const ActivationStack>(&stack, 1), cfg, options);
  return std::move(ce.maps.front());
}

ClassExplanation explain_class(std::span<const ActivationStack> stacks, const PipelineConfig& cfg,
                               const ExplainOptions& options) {
  if (stacks.empty()) throw ArgumentError("explain: no images");
  if (options.k < 2) throw ArgumentError("explain: K must be >= 2");
  check_homogeneous(stacks);

  std::vector<FeatureMatrix> features;
  features.reserve(stacks.size());
  std::vector<Matrix> parts;
  for (const ActivationStack& s : stacks) {
    features.push_back(build_features(s, cfg));
  }
  for (const FeatureMatrix& f : features) parts.push_back(f.rows);
  const Matrix all = vstack(parts);
  parts.clear();

  std::vector<int> labels;
  ClassExplanation out{fit_model(all, options, &labels), {}};
  const std::string name = model_id(options);
  std::size_t offset = 0;
  for (std::size_t i = 0; i < stacks.size(); ++i) {
    const std::size_t n = features[i].rows.rows;
    std::vector<int> mine(labels.begin() + static_cast<std::ptrdiff_t>(offset),
                          labels.begin() + static_cast<std::ptrdiff_t>(offset + n));
    out.maps.push_back(make_map(stacks[i], features[i], std::move(mine), options.k, name));
    offset += n;
  }
  return out;
}

ClassExplanation explain_class(const Manifest& manifest, std::span<const std::string> image_ids,
                               const PipelineConfig& cfg, const ExplainOptions& options) {
  std::vector<ActivationStack> stacks;
  if (image_ids.empty()) {
    for (std::size_t i = 0; i < manifest.entries.size(); ++i) stacks.push_back(load_stack(manifest, i));
  } else {
    for (const std::string& id : image_ids) stacks.push_back(load_stack(manifest, manifest.find(id)));
  }
  return explain_class(stacks, cfg, options);
}

ExplanationMap explain_with_model(const ActivationStack& stack, const PipelineConfig& cfg,
                                  const ClusterModel& model, const std::string& model_name) {
  const FeatureMatrix fm = build_features(stack, cfg);
  return make_map(stack, fm, predict_labels(model, fm.rows), model_k(model), model_name);
}

std::vector<ConceptPatch> extract_concept_patches(std::span<const ExplanationMap> maps, int cluster_id,
                                                  std::span<const RgbImage> images, std::size_t min_area,
                                                  Connectivity connectivity) {
  if (!images.empty() && images.size() != maps.size()) {
    throw ArgumentError("extract_concept_patches: images must be empty or parallel to maps");
  }
  std::vector<ConceptPatch> out;
  for (std::size_t m = 0; m < maps.size(); ++m) {
    const ExplanationMap& map = maps[m];
    if (cluster_id < 0 || static_cast<std::size_t>(cluster_id) >= map.k) {
      throw ArgumentError("extract_concept_patches: cluster id " + std::to_string(cluster_id) +
                          " outside [0, " + std::to_string(map.k) + ")");
    }
    const RgbImage* img = images.empty() ? nullptr : &images[m];
    if (img && (img->height != map.source_size.height || img->width != map.source_size.width)) {
      throw ArgumentError("extract_concept_patches: image for '" + map.image_id +
                          "' does not match its source size");
    }
    for (const Component& comp : connected_components(map, connectivity)) {
      if (comp.label != cluster_id || comp.area() < min_area) continue;
      ConceptPatch p;
      p.image_id = map.image_id;
      p.map_box = outer_box(comp.pixels);
      p.source_box = scale_box(p.map_box, map.height, map.width, map.source_size);
      p.area = comp.area();
      if (img) {
        const Box& b = p.source_box;
        p.pixels = RgbImage(static_cast<std::size_t>(b.height()), static_cast<std::size_t>(b.width()));
        for (int y = b.ymin; y <= b.ymax; ++y) {
          const std::uint8_t* src = img->at(static_cast<std::size_t>(y), static_cast<std::size_t>(b.xmin));
          std::copy(src, src + 3 * b.width(), p.pixels.at(static_cast<std::size_t>(y - b.ymin), 0));
        }
      }
      out.push_back(std::move(p));
    }
  }
  return out;
}

}  // namespace nave
