#pragma once

// Writes a small planted dataset to disk (tensors, PNGs, manifest and
// annotations) for the CLI tests and the acceptance binary.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nave/image_io.hpp"
#include "nave/tensor_io.hpp"
#include "synthetic.hpp"

namespace fixture {

struct Dataset {
  std::filesystem::path dir;
  std::filesystem::path manifest;
  std::filesystem::path annotations;
  std::vector<std::string> ids;
  synth::Layout layout;
  int scale = 2;  // source pixels per map site
};

/// `n` images of the three-region layout at `size` x `size`, each with two
/// layers (4 and 16 channels) and a source image `scale` times larger.
inline Dataset make_dataset(const std::filesystem::path& dir, int n, int size = 16, int scale = 2,
                            double sigma = 0.02) {
  namespace fs = std::filesystem;
  fs::remove_all(dir);
  fs::create_directories(dir / "acts");
  Dataset d;
  d.dir = dir;
  d.scale = scale;
  d.layout = synth::three_regions(size);
  const int src = size * scale;
  nlohmann::json entries = nlohmann::json::array();
  nlohmann::json images = nlohmann::json::array();
  const nave::Box& r = d.layout.rectangle;
  for (int i = 0; i < n; ++i) {
    const std::string id = "img_" + std::to_string(i);
    d.ids.push_back(id);
    const auto stack = synth::planted_stack(d.layout.labels, size, {4, 16}, sigma, 1000 + static_cast<unsigned>(i), id);
    nlohmann::json layers = nlohmann::json::array();
    for (std::size_t l = 0; l < stack.layers.size(); ++l) {
      const std::string rel = "acts/" + id + "_l" + std::to_string(l) + ".npy";
      nave::write_tensor(stack.layers[l], dir / rel);
      layers.push_back(rel);
    }
    nave::RgbImage img(static_cast<std::size_t>(src), static_cast<std::size_t>(src));
    for (int y = 0; y < src; ++y)
      for (int x = 0; x < src; ++x) {
        const int lab = d.layout.labels[static_cast<std::size_t>((y / scale) * size + x / scale)];
        auto* p = img.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x));
        p[0] = static_cast<std::uint8_t>(40 + 90 * lab);
        p[1] = static_cast<std::uint8_t>(200 - 60 * lab);
        p[2] = static_cast<std::uint8_t>(10 * i);
      }
    nave::write_png(img, dir / (id + ".png"));
    entries.push_back({{"image_id", id}, {"source_size", {src, src}}, {"layers", layers}, {"image", id + ".png"}});
    images.push_back({{"image_id", id},
                      {"boxes",
                       {{r.xmin * scale, r.ymin * scale, (r.xmax + 1) * scale - 1, (r.ymax + 1) * scale - 1}}}});
  }
  d.manifest = dir / "manifest.json";
  d.annotations = dir / "annotations.json";
  std::ofstream(d.manifest) << nlohmann::json{{"layer_names", {"early", "late"}}, {"entries", entries}}.dump(2);
  std::ofstream(d.annotations) << nlohmann::json{{"images", images}}.dump(2);
  return d;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace fixture
