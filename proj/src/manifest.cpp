#include "nave/manifest.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "nave/error.hpp"

namespace nave {
namespace {

using json = nlohmann::json;

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(origin + ": invalid JSON: " + e.what());
  }
}

[[noreturn]] void schema_error(const std::string& origin, const std::string& where,
                               const std::string& what) {
  throw ValidationError(origin + ": " + where + ": " + what);
}

std::size_t positive_int(const json& v, const std::string& origin, const std::string& where) {
  if (!v.is_number_integer() || v.get<long long>() < 1) {
    schema_error(origin, where, "must be an integer >= 1");
  }
  return v.get<std::size_t>();
}

}  // namespace

std::size_t Manifest::find(const std::string& image_id) const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].image_id == image_id) return i;
  }
  throw ArgumentError("image_id '" + image_id + "' not in manifest");
}

Manifest parse_manifest(const std::string& json_text, const std::filesystem::path& base_dir,
                        const std::string& origin) {
  const json doc = parse_json(json_text, origin);
  if (!doc.is_object()) schema_error(origin, "document", "must be an object");

  Manifest m;
  if (doc.contains("layer_names")) {
    const json& names = doc["layer_names"];
    if (!names.is_array()) schema_error(origin, "layer_names", "must be an array");
    for (const json& n : names) {
      if (!n.is_string()) schema_error(origin, "layer_names", "entries must be strings");
      m.layer_names.push_back(n.get<std::string>());
    }
  }
  if (!doc.contains("entries") || !doc["entries"].is_array()) {
    schema_error(origin, "entries", "must be an array");
  }

  std::set<std::string> seen;
  for (std::size_t i = 0; i < doc["entries"].size(); ++i) {
    const json& e = doc["entries"][i];
    const std::string where = "entries[" + std::to_string(i) + "]";
    if (!e.is_object()) schema_error(origin, where, "must be an object");

    ManifestEntry entry;
    if (!e.contains("image_id") || !e["image_id"].is_string() ||
        e["image_id"].get<std::string>().empty()) {
      schema_error(origin, where + ".image_id", "must be a non-empty string");
    }
    entry.image_id = e["image_id"].get<std::string>();
    if (!seen.insert(entry.image_id).second) {
      schema_error(origin, where + ".image_id", "duplicate id '" + entry.image_id + "'");
    }

    if (!e.contains("source_size") || !e["source_size"].is_array() || e["source_size"].size() != 2) {
      schema_error(origin, where + ".source_size", "must be [H, W]");
    }
    entry.source_size.height = positive_int(e["source_size"][0], origin, where + ".source_size[0]");
    entry.source_size.width = positive_int(e["source_size"][1], origin, where + ".source_size[1]");

    if (!e.contains("layers") || !e["layers"].is_array() || e["layers"].empty()) {
      schema_error(origin, where + ".layers", "must be a non-empty array of paths");
    }
    std::vector<std::size_t> channels;
    for (std::size_t j = 0; j < e["layers"].size(); ++j) {
      const json& p = e["layers"][j];
      const std::string lw = where + ".layers[" + std::to_string(j) + "]";
      if (!p.is_string()) schema_error(origin, lw, "must be a path string");
      std::filesystem::path path = p.get<std::string>();
      if (path.is_relative()) path = base_dir / path;
      if (!std::filesystem::exists(path)) {
        schema_error(origin, lw, "file not found: '" + path.string() + "'");
      }
      channels.push_back(read_tensor_shape(path).channels);
      entry.layers.push_back(std::move(path));
    }

    if (e.contains("image") && !e["image"].is_null()) {
      if (!e["image"].is_string()) schema_error(origin, where + ".image", "must be a path or null");
      std::filesystem::path path = e["image"].get<std::string>();
      if (path.is_relative()) path = base_dir / path;
      entry.image = std::move(path);
    }

    if (m.entries.empty()) {
      m.channels = channels;
      if (!m.layer_names.empty() && m.layer_names.size() != channels.size()) {
        schema_error(origin, where + ".layers",
                     "has " + std::to_string(channels.size()) + " layers but layer_names has " +
                         std::to_string(m.layer_names.size()));
      }
    } else if (channels.size() != m.channels.size()) {
      schema_error(origin, where + ".layers",
                   "layer count " + std::to_string(channels.size()) + " differs from first entry (" +
                       std::to_string(m.channels.size()) + ")");
    } else if (channels != m.channels) {
      schema_error(origin, where + ".layers", "per-layer channel counts differ from first entry");
    }
    m.entries.push_back(std::move(entry));
  }
  return m;
}

Manifest load_manifest(const std::filesystem::path& path) {
  const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  return parse_manifest(slurp(path), base, path.string());
}

std::vector<BoxAnnotation> parse_annotations(const std::string& json_text, const std::string& origin) {
  const json doc = parse_json(json_text, origin);
  if (!doc.is_object() || !doc.contains("images") || !doc["images"].is_array()) {
    schema_error(origin, "images", "must be an array");
  }
  std::vector<BoxAnnotation> out;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < doc["images"].size(); ++i) {
    const json& img = doc["images"][i];
    const std::string where = "images[" + std::to_string(i) + "]";
    if (!img.is_object() || !img.contains("image_id") || !img["image_id"].is_string() ||
        img["image_id"].get<std::string>().empty()) {
      schema_error(origin, where + ".image_id", "must be a non-empty string");
    }
    BoxAnnotation a;
    a.image_id = img["image_id"].get<std::string>();
    if (!seen.insert(a.image_id).second) {
      schema_error(origin, where + ".image_id", "duplicate id '" + a.image_id + "'");
    }
    if (!img.contains("boxes") || !img["boxes"].is_array()) {
      schema_error(origin, where + ".boxes", "must be an array");
    }
    for (std::size_t j = 0; j < img["boxes"].size(); ++j) {
      const json& b = img["boxes"][j];
      const std::string bw = where + ".boxes[" + std::to_string(j) + "]";
      if (!b.is_array() || b.size() != 4) schema_error(origin, bw, "must be [xmin, ymin, xmax, ymax]");
      int v[4];
      for (int k = 0; k < 4; ++k) {
        if (!b[k].is_number_integer() || b[k].get<long long>() < 0 ||
            b[k].get<long long>() > std::numeric_limits<int>::max()) {
          schema_error(origin, bw, "corners must be non-negative integers");
        }
        v[k] = b[k].get<int>();
      }
      const Box box{v[0], v[1], v[2], v[3]};
      if (box.xmax < box.xmin) schema_error(origin, bw, "xmax < xmin");
      if (box.ymax < box.ymin) schema_error(origin, bw, "ymax < ymin");
      a.boxes.push_back(box);
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<BoxAnnotation> load_annotations(const std::filesystem::path& path) {
  return parse_annotations(slurp(path), path.string());
}

void validate_annotations(const std::vector<BoxAnnotation>& annotations, const Manifest& manifest) {
  for (const BoxAnnotation& a : annotations) {
    const ManifestEntry* entry = nullptr;
    for (const ManifestEntry& e : manifest.entries) {
      if (e.image_id == a.image_id) entry = &e;
    }
    if (entry == nullptr) continue;
    const auto w = static_cast<int>(entry->source_size.width);
    const auto h = static_cast<int>(entry->source_size.height);
    for (std::size_t j = 0; j < a.boxes.size(); ++j) {
      const Box& b = a.boxes[j];
      if (b.xmax >= w || b.ymax >= h) {
        throw ValidationError("annotation '" + a.image_id + "' box " + std::to_string(j) +
                              " exceeds source size " + std::to_string(h) + "x" + std::to_string(w));
      }
    }
  }
}

ActivationStack load_stack(const Manifest& manifest, std::size_t entry_index) {
  const ManifestEntry& e = manifest.entries.at(entry_index);
  ActivationStack stack;
  stack.image_id = e.image_id;
  stack.source_size = e.source_size;
  for (std::size_t j = 0; j < e.layers.size(); ++j) {
    TensorRecord t = read_tensor(e.layers[j]);
    if (t.shape.channels != manifest.channels[j]) {
      throw ValidationError(e.layers[j].string() + ": channel count changed since manifest load");
    }
    stack.layers.push_back(std::move(t));
  }
  return stack;
}

std::string manifest_to_json(const Manifest& manifest, const std::filesystem::path& base_dir) {
  auto rel = [&](const std::filesystem::path& p) {
    std::error_code ec;
    auto r = std::filesystem::relative(p, base_dir, ec);
    return (ec || r.empty()) ? p.string() : r.string();
  };
  json doc;
  doc["layer_names"] = manifest.layer_names;
  doc["entries"] = json::array();
  for (const ManifestEntry& e : manifest.entries) {
    json je;
    je["image_id"] = e.image_id;
    je["source_size"] = {e.source_size.height, e.source_size.width};
    je["layers"] = json::array();
    for (const auto& p : e.layers) je["layers"].push_back(rel(p));
    je["image"] = e.image ? json(rel(*e.image)) : json(nullptr);
    doc["entries"].push_back(std::move(je));
  }
  return doc.dump(2);
}

}  // namespace nave
