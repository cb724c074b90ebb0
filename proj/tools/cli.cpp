#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "nave/error.hpp"
#include "nave/explanation.hpp"
#include "nave/features.hpp"
#include "nave/image_io.hpp"
#include "nave/localization.hpp"
#include "nave/manifest.hpp"
#include "nave/model_io.hpp"
#include "nave/pca.hpp"
#include "nave/render.hpp"
#include "nave/tensor_io.hpp"

namespace nave::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

/// Everything a command needs; serialized next to every output.
struct RunConfig {
  std::string command;
  std::string manifest;
  std::string annotations;
  std::string out_dir = "out";
  std::string model;
  std::string maps_dir;
  std::size_t k = 5;
  std::string backend = "kmeans";
  std::uint64_t seed = 0;
  std::string layers = "last";
  std::string resolution;
  std::size_t restarts = 1;
  std::size_t max_iter = 300;
  double tol = 1e-4;
  std::string strategy = "inner";
  int connectivity = 4;
  std::size_t jobs = 0;
  std::vector<std::string> ids;
  int cluster = 0;
  std::size_t min_area = 16;
  std::size_t runs = 20;
  std::vector<std::size_t> ks{2, 3, 4, 5, 6};
  bool csv = false;
  int highlight = -1;

  json to_json() const {
    return {{"command", command},   {"manifest", manifest},     {"annotations", annotations},
            {"out", out_dir},       {"model", model},           {"maps", maps_dir},
            {"k", k},               {"backend", backend},       {"seed", seed},
            {"layers", layers},     {"resolution", resolution}, {"restarts", restarts},
            {"max-iter", max_iter}, {"tol", tol},               {"strategy", strategy},
            {"connectivity", connectivity}, {"jobs", jobs},     {"ids", ids},
            {"cluster", cluster},   {"min-area", min_area},     {"runs", runs},
            {"ks", ks},             {"csv", csv},               {"highlight", highlight}};
  }
};

struct UsageError : Error {
  using Error::Error;
};

// Files written by the current command; removed again if it fails.
class OutputSet {
 public:
  fs::path add(const fs::path& p) {
    std::lock_guard<std::mutex> lock(mu_);
    files_.push_back(p);
    return p;
  }
  void rollback() {
    std::error_code ec;
    for (const fs::path& p : files_) fs::remove(p, ec);
    files_.clear();
  }

 private:
  std::mutex mu_;
  std::vector<fs::path> files_;
};

std::string file_stem(const std::string& image_id) {
  std::string s = image_id;
  for (char& c : s) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_';
    if (!ok) c = '_';
  }
  return s;
}

void write_text(const fs::path& path, const std::string& text, OutputSet& outputs) {
  outputs.add(path);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f << text;
  if (!f) throw IoError("write failed for '" + path.string() + "'");
}

template <class Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn&& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  // Report the failure of the lowest index so messages do not depend on N.
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<std::size_t> parse_layers(const std::string& spec, std::size_t layer_count) {
  if (spec == "all") return {};
  if (spec == "last") return {layer_count - 1};
  std::vector<std::size_t> out;
  std::stringstream ss(spec);
  for (std::string tok; std::getline(ss, tok, ',');) {
    try {
      std::size_t used = 0;
      const long v = std::stol(tok, &used);
      if (used != tok.size() || v < 0) throw std::invalid_argument(tok);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::logic_error&) {
      throw UsageError("--layers: expected 'last', 'all' or comma-separated indices, got '" + spec + "'");
    }
  }
  if (out.empty()) throw UsageError("--layers: empty selection");
  return out;
}

std::optional<Resolution> parse_resolution(const std::string& spec) {
  if (spec.empty()) return std::nullopt;
  const auto x = spec.find('x');
  try {
    if (x == std::string::npos) throw std::invalid_argument(spec);
    std::size_t u1 = 0, u2 = 0;
    const std::string hs = spec.substr(0, x), ws = spec.substr(x + 1);
    const long h = std::stol(hs, &u1), w = std::stol(ws, &u2);
    if (u1 != hs.size() || u2 != ws.size() || h < 1 || w < 1) throw std::invalid_argument(spec);
    return Resolution{static_cast<std::size_t>(h), static_cast<std::size_t>(w)};
  } catch (const std::logic_error&) {
    throw UsageError("--resolution: expected HxW, got '" + spec + "'");
  }
}

struct Context {
  RunConfig cfg;
  Manifest manifest;
  std::vector<std::size_t> entries;
  PipelineConfig pipeline;
  ExplainOptions explain;
  std::size_t jobs = 1;
  fs::path out_dir;
  OutputSet outputs;
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;
};

void validate_common(const RunConfig& cfg) {
  parse_backend(cfg.backend);
  if (cfg.k < 2) throw UsageError("--k must be >= 2");
  if (cfg.restarts < 1) throw UsageError("--restarts must be >= 1");
  if (cfg.max_iter < 1) throw UsageError("--max-iter must be >= 1");
  if (!(cfg.tol >= 0.0)) throw UsageError("--tol must be >= 0");
  parse_strategy(cfg.strategy);
  parse_connectivity(cfg.connectivity);
  parse_resolution(cfg.resolution);
  if (cfg.layers != "last" && cfg.layers != "all") parse_layers(cfg.layers, 1);
  if (cfg.runs < 1) throw UsageError("--runs must be >= 1");
  for (std::size_t k : cfg.ks) {
    if (k < 2) throw UsageError("--ks entries must be >= 2");
  }
  if (cfg.manifest.empty() || !fs::is_regular_file(cfg.manifest)) {
    throw UsageError("manifest not found: '" + cfg.manifest + "'");
  }
  if (cfg.command == "eval-loc" && !fs::is_regular_file(cfg.annotations)) {
    throw UsageError("annotations not found: '" + cfg.annotations + "'");
  }
  if (!cfg.model.empty() && !fs::is_regular_file(cfg.model)) {
    throw UsageError("model not found: '" + cfg.model + "'");
  }
  if (!cfg.maps_dir.empty() && !fs::is_directory(cfg.maps_dir)) {
    throw UsageError("maps directory not found: '" + cfg.maps_dir + "'");
  }
}

void prepare(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  validate_common(cfg);
  ctx.manifest = load_manifest(cfg.manifest);
  if (ctx.manifest.entries.empty()) throw ValidationError(cfg.manifest + ": manifest has no entries");

  if (cfg.ids.empty()) {
    for (std::size_t i = 0; i < ctx.manifest.entries.size(); ++i) ctx.entries.push_back(i);
  } else {
    for (const std::string& id : cfg.ids) ctx.entries.push_back(ctx.manifest.find(id));
  }
  ctx.pipeline.layer_selection = parse_layers(cfg.layers, ctx.manifest.layer_count());
  ctx.pipeline.target_resolution = parse_resolution(cfg.resolution);
  resolve_selection(ctx.pipeline, ctx.manifest.layer_count());

  ctx.explain.backend = parse_backend(cfg.backend);
  ctx.explain.k = cfg.k;
  ctx.explain.seed = cfg.seed;
  ctx.explain.restarts = cfg.restarts;
  ctx.explain.max_iter = cfg.max_iter;
  ctx.explain.tol = cfg.tol;

  ctx.jobs = cfg.jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.jobs;
  ctx.out_dir = cfg.out_dir;
  std::error_code ec;
  fs::create_directories(ctx.out_dir, ec);
  if (ec || !fs::is_directory(ctx.out_dir)) {
    throw IoError("cannot create output directory '" + cfg.out_dir + "'");
  }
}

json sidecar_base(const Context& ctx) {
  return {{"tool", "nave"}, {"version", kToolVersion}, {"config", ctx.cfg.to_json()}};
}

// key = value lines accepted back by --config.
std::string config_text(const RunConfig& cfg, const CLI::App& sub) {
  std::ostringstream s;
  s << "# nave " << kToolVersion << " " << cfg.command << "\n";
  const json j = cfg.to_json();
  for (const auto& [key, value] : j.items()) {
    if (key == "command" || sub.get_option_no_throw("--" + key) == nullptr) continue;
    if (value.is_array()) {
      std::string joined;
      for (const auto& v : value) {
        if (!joined.empty()) joined += ",";
        joined += v.is_string() ? v.get<std::string>() : v.dump();
      }
      if (joined.empty()) continue;
      s << key << " = \"" << joined << "\"\n";
    } else if (value.is_string()) {
      if (value.get<std::string>().empty()) continue;
      s << key << " = " << value.dump() << "\n";
    } else {
      s << key << " = " << value.dump() << "\n";
    }
  }
  return s.str();
}

void write_run_record(Context& ctx, const CLI::App& sub) {
  write_text(ctx.out_dir / "run.json", sidecar_base(ctx).dump(2) + "\n", ctx.outputs);
  write_text(ctx.out_dir / "run.toml", config_text(ctx.cfg, sub), ctx.outputs);
}

TensorRecord labels_tensor(const ExplanationMap& map) {
  TensorRecord t;
  t.shape = {1, map.height, map.width};
  t.data.assign(map.labels.begin(), map.labels.end());
  return t;
}

ExplanationMap read_labels(const fs::path& npy, const ManifestEntry& entry, std::size_t k) {
  const TensorRecord t = read_tensor(npy);
  if (t.shape.channels != 1) throw FormatError(npy.string() + ": shape: label files have one channel");
  ExplanationMap map;
  map.height = t.shape.height;
  map.width = t.shape.width;
  map.k = k;
  map.image_id = entry.image_id;
  map.source_size = entry.source_size;
  map.labels.reserve(t.data.size());
  for (float v : t.data) {
    if (v != static_cast<float>(static_cast<int>(v)) || v < 0) {
      throw FormatError(npy.string() + ": data: labels must be non-negative integers");
    }
    map.labels.push_back(static_cast<int>(v));
  }
  try {
    map.validate();
  } catch (const ArgumentError& e) {
    throw FormatError(npy.string() + ": " + e.what());
  }
  return map;
}

void write_map_outputs(Context& ctx, const ExplanationMap& map) {
  const std::string stem = file_stem(map.image_id);
  LabelRenderOptions ro;
  if (ctx.cfg.highlight >= 0) ro.highlight = ctx.cfg.highlight;
  const fs::path png = ctx.outputs.add(ctx.out_dir / (stem + ".png"));
  write_png(render_labels(map, default_palette(), ro), png);
  write_tensor(labels_tensor(map), ctx.outputs.add(ctx.out_dir / (stem + ".labels.npy")));

  json side = sidecar_base(ctx);
  side["image_id"] = map.image_id;
  side["K"] = map.k;
  side["seed"] = ctx.cfg.seed;
  side["backend"] = ctx.cfg.backend;
  side["model_id"] = map.model_id;
  side["layer_selection"] = resolve_selection(ctx.pipeline, ctx.manifest.layer_count());
  side["resolution"] = {map.height, map.width};
  side["source_size"] = {map.source_size.height, map.source_size.width};
  write_text(ctx.out_dir / (stem + ".json"), side.dump(2) + "\n", ctx.outputs);
}

std::vector<ExplanationMap> image_maps(Context& ctx, const ExplainOptions& opts) {
  std::vector<ExplanationMap> maps(ctx.entries.size());
  parallel_for(ctx.entries.size(), ctx.jobs, [&](std::size_t i) {
    maps[i] = explain_image(load_stack(ctx.manifest, ctx.entries[i]), ctx.pipeline, opts);
  });
  return maps;
}

// Class-wise maps: a saved model if --model was given, otherwise one fit over
// all selected images.
std::vector<ExplanationMap> class_maps(Context& ctx, bool save) {
  if (!ctx.cfg.model.empty()) {
    const ClusterModel model = load_model(ctx.cfg.model);
    const std::string name = fs::path(ctx.cfg.model).filename().string();
    std::vector<ExplanationMap> maps(ctx.entries.size());
    parallel_for(ctx.entries.size(), ctx.jobs, [&](std::size_t i) {
      maps[i] = explain_with_model(load_stack(ctx.manifest, ctx.entries[i]), ctx.pipeline, model, name);
    });
    return maps;
  }
  std::vector<ActivationStack> stacks(ctx.entries.size());
  parallel_for(ctx.entries.size(), ctx.jobs,
               [&](std::size_t i) { stacks[i] = load_stack(ctx.manifest, ctx.entries[i]); });
  ClassExplanation ce = explain_class(stacks, ctx.pipeline, ctx.explain);
  if (save) save_model(ce.model, ctx.outputs.add(ctx.out_dir / "class_model.nave"));
  return std::move(ce.maps);
}

const RgbImage load_entry_image(const Context& ctx, std::size_t entry) {
  const ManifestEntry& e = ctx.manifest.entries[entry];
  if (!e.image) throw ValidationError("manifest entry '" + e.image_id + "' has no image path");
  RgbImage img = read_png(*e.image);
  if (img.height != e.source_size.height || img.width != e.source_size.width) {
    throw ValidationError("image '" + e.image->string() + "' is " + std::to_string(img.height) + "x" +
                          std::to_string(img.width) + " but source_size says " +
                          std::to_string(e.source_size.height) + "x" + std::to_string(e.source_size.width));
  }
  return img;
}

int cmd_explain(Context& ctx) {
  const auto maps = image_maps(ctx, ctx.explain);
  parallel_for(maps.size(), ctx.jobs, [&](std::size_t i) { write_map_outputs(ctx, maps[i]); });
  *ctx.out << "explained " << maps.size() << " image(s) with " << ctx.cfg.backend << " K=" << ctx.cfg.k
           << " -> " << ctx.out_dir.string() << "\n";
  return kOk;
}

int cmd_explain_class(Context& ctx) {
  const auto maps = class_maps(ctx, true);
  parallel_for(maps.size(), ctx.jobs, [&](std::size_t i) { write_map_outputs(ctx, maps[i]); });
  *ctx.out << "class explanation over " << maps.size() << " image(s), K=" << maps.front().k << " -> "
           << ctx.out_dir.string() << "\n";
  return kOk;
}

int cmd_eval_loc(Context& ctx) {
  const auto annotations = load_annotations(ctx.cfg.annotations);
  validate_annotations(annotations, ctx.manifest);

  std::vector<ExplanationMap> maps(ctx.entries.size());
  if (!ctx.cfg.maps_dir.empty()) {
    parallel_for(ctx.entries.size(), ctx.jobs, [&](std::size_t i) {
      const ManifestEntry& e = ctx.manifest.entries[ctx.entries[i]];
      const fs::path base = fs::path(ctx.cfg.maps_dir) / file_stem(e.image_id);
      std::size_t k = ctx.cfg.k;
      std::ifstream side(base.string() + ".json");
      if (side) {
        try {
          k = json::parse(side).at("K").get<std::size_t>();
        } catch (const json::exception& ex) {
          throw FormatError(base.string() + ".json: K: " + ex.what());
        }
      }
      maps[i] = read_labels(base.string() + ".labels.npy", e, k);
    });
  } else {
    maps = image_maps(ctx, ctx.explain);
  }

  EvalOptions eo;
  eo.strategy = parse_strategy(ctx.cfg.strategy);
  eo.connectivity = parse_connectivity(ctx.cfg.connectivity);
  const LocalizationReport report = evaluate(maps, annotations, eo);
  for (const std::string& id : report.skipped) {
    *ctx.err << "warning: no annotation for '" << id << "', skipped\n";
  }
  write_text(ctx.out_dir / "report.json", report_to_json(report) + "\n", ctx.outputs);
  if (ctx.cfg.csv) write_text(ctx.out_dir / "report.csv", report_to_csv(report), ctx.outputs);

  std::size_t correct = 0;
  for (const auto& r : report.per_image) correct += r.correct ? 1 : 0;
  std::ostringstream pct;
  pct.setf(std::ios::fixed);
  pct.precision(1);
  pct << 100.0 * report.corloc;
  *ctx.out << "CorLoc (" << to_string(report.strategy) << "-box): " << pct.str() << "% (" << correct << "/"
           << report.n_images << ")\n";
  return kOk;
}

int cmd_patches(Context& ctx) {
  if (ctx.cfg.model.empty() && (ctx.cfg.cluster < 0 || static_cast<std::size_t>(ctx.cfg.cluster) >= ctx.cfg.k)) {
    throw UsageError("--cluster must be in [0, k)");
  }
  const auto maps = class_maps(ctx, false);
  std::vector<RgbImage> images(ctx.entries.size());
  parallel_for(ctx.entries.size(), ctx.jobs,
               [&](std::size_t i) { images[i] = load_entry_image(ctx, ctx.entries[i]); });
  EvalOptions eo;
  eo.connectivity = parse_connectivity(ctx.cfg.connectivity);
  const auto patches =
      extract_concept_patches(maps, ctx.cfg.cluster, images, ctx.cfg.min_area, eo.connectivity);

  json index = sidecar_base(ctx);
  index["cluster"] = ctx.cfg.cluster;
  index["patches"] = json::array();
  std::map<std::string, int> per_image;
  for (const ConceptPatch& p : patches) {
    const std::string name =
        file_stem(p.image_id) + "_c" + std::to_string(ctx.cfg.cluster) + "_" + std::to_string(per_image[p.image_id]++) + ".png";
    write_png(p.pixels, ctx.outputs.add(ctx.out_dir / name));
    index["patches"].push_back({{"file", name},
                                {"image_id", p.image_id},
                                {"box", {p.source_box.xmin, p.source_box.ymin, p.source_box.xmax, p.source_box.ymax}},
                                {"map_box", {p.map_box.xmin, p.map_box.ymin, p.map_box.xmax, p.map_box.ymax}},
                                {"area", p.area}});
  }
  write_text(ctx.out_dir / "patches.json", index.dump(2) + "\n", ctx.outputs);
  *ctx.out << patches.size() << " patch(es) of cluster " << ctx.cfg.cluster << " from " << maps.size()
           << " image(s) -> " << ctx.out_dir.string() << "\n";
  return kOk;
}

int cmd_avg_color(Context& ctx) {
  parallel_for(ctx.entries.size(), ctx.jobs, [&](std::size_t i) {
    const RgbImage image = load_entry_image(ctx, ctx.entries[i]);
    const ActivationStack stack = load_stack(ctx.manifest, ctx.entries[i]);
    std::vector<ExplanationMap> maps;
    for (std::size_t r = 0; r < ctx.cfg.runs; ++r) {
      ExplainOptions o = ctx.explain;
      o.seed = ctx.cfg.seed + r;
      maps.push_back(explain_image(stack, ctx.pipeline, o));
    }
    const std::string stem = file_stem(stack.image_id);
    write_png(average_color_visualization(image, maps), ctx.outputs.add(ctx.out_dir / (stem + ".avg.png")));
    json side = sidecar_base(ctx);
    side["image_id"] = stack.image_id;
    side["seeds"] = {ctx.cfg.seed, ctx.cfg.seed + ctx.cfg.runs - 1};
    write_text(ctx.out_dir / (stem + ".avg.json"), side.dump(2) + "\n", ctx.outputs);
  });
  *ctx.out << "average-color renders over " << ctx.cfg.runs << " run(s) for " << ctx.entries.size()
           << " image(s) -> " << ctx.out_dir.string() << "\n";
  return kOk;
}

int cmd_pca_vis(Context& ctx) {
  parallel_for(ctx.entries.size(), ctx.jobs, [&](std::size_t i) {
    const ActivationStack stack = load_stack(ctx.manifest, ctx.entries[i]);
    const FeatureMatrix fm = build_features(stack, ctx.pipeline);
    const std::string stem = file_stem(stack.image_id);
    const PcaModel pca = pca_fit(fm.rows, 3);
    write_png(render_pca(pca_project(pca, fm.rows), fm.resolution.height, fm.resolution.width,
                         stack.source_size.height, stack.source_size.width),
              ctx.outputs.add(ctx.out_dir / (stem + ".pca.png")));
    for (std::size_t k : ctx.cfg.ks) {
      for (Backend b : {Backend::kPca, Backend::kKMeans}) {
        ExplainOptions o = ctx.explain;
        o.backend = b;
        o.k = k;
        const ExplanationMap map = explain_image(stack, ctx.pipeline, o);
        const std::string name = stem + "." + to_string(b) + "_k" + std::to_string(k) + ".png";
        write_png(render_labels(map), ctx.outputs.add(ctx.out_dir / name));
      }
    }
    json side = sidecar_base(ctx);
    side["image_id"] = stack.image_id;
    side["explained_variance"] = pca.explained_variance;
    side["explained_variance_ratio"] = {pca.explained_variance_ratio(0), pca.explained_variance_ratio(1),
                                        pca.explained_variance_ratio(2)};
    write_text(ctx.out_dir / (stem + ".pca.json"), side.dump(2) + "\n", ctx.outputs);
  });
  *ctx.out << "PCA renders and K sweep for " << ctx.entries.size() << " image(s) -> " << ctx.out_dir.string()
           << "\n";
  return kOk;
}

// Config file overlay: `key = value` lines, '#' comments, optional [section]
// headers ignored. Flags given on the command line win.
void apply_config_file(const std::string& path, CLI::App& sub) {
  std::ifstream in(path);
  if (!in) throw UsageError("config file not found: '" + path + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty() || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    CLI::Option* opt = sub.get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config") {
      throw UsageError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "' for " + sub.get_name());
    }
    if (opt->count() > 0) continue;
    std::vector<std::string> parts;
    if (opt->get_items_expected_max() > 1) {
      std::stringstream ss(value);
      for (std::string tok; std::getline(ss, tok, ',');) parts.push_back(trim(tok));
    } else {
      parts.push_back(value);
    }
    try {
      for (const auto& p : parts) opt->add_result(p);
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw UsageError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cluster encoder activations into concept maps and evaluate them.", "nave"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_path;
  std::vector<std::pair<CLI::App*, std::string>> subs;

  std::map<CLI::App*, std::size_t> default_k_of;
  auto common = [&](CLI::App* sub, std::size_t default_k) {
    default_k_of[sub] = default_k;
    sub->add_option("--manifest", cfg.manifest, "Manifest JSON")->required();
    sub->add_option("--out", cfg.out_dir, "Output directory")->capture_default_str();
    sub->add_option("--config", config_path, "key = value file; command-line flags take precedence");
    sub->add_option("--layers", cfg.layers, "'last', 'all' or comma-separated layer indices")->capture_default_str();
    sub->add_option("--resolution", cfg.resolution, "Map size HxW (default: first selected layer)");
    sub->add_option("--ids", cfg.ids, "Restrict to these image ids")->delimiter(',');
    sub->add_option("--seed", cfg.seed, "Clustering seed")->capture_default_str();
    sub->add_option("--restarts", cfg.restarts, "k-means++ restarts")->capture_default_str();
    sub->add_option("--max-iter", cfg.max_iter, "Lloyd iteration cap")->capture_default_str();
    sub->add_option("--tol", cfg.tol, "Relative inertia tolerance")->capture_default_str();
    sub->add_option("--jobs", cfg.jobs, "Worker threads (0 = all cores)")->capture_default_str();
    sub->add_option("--backend", cfg.backend, "kmeans | ward | pca")->capture_default_str();
    sub->add_option("--k", cfg.k, "Number of clusters (default " + std::to_string(default_k) + ")");
  };

  CLI::App* explain = app.add_subcommand("explain", "Image-wise explanation maps and renders");
  subs.emplace_back(explain, "explain");
  CLI::App* explain_cls = app.add_subcommand("explain-class", "One model over all listed images");
  subs.emplace_back(explain_cls, "explain-class");
  CLI::App* eval = app.add_subcommand("eval-loc", "Object-localization CorLoc evaluation");
  subs.emplace_back(eval, "eval-loc");
  CLI::App* patches = app.add_subcommand("patches", "Crop concept patches of one cluster");
  subs.emplace_back(patches, "patches");
  CLI::App* avg = app.add_subcommand("avg-color", "Average segment color over several seeds");
  subs.emplace_back(avg, "avg-color");
  CLI::App* pcavis = app.add_subcommand("pca-vis", "3-component PCA render and K sweep");
  subs.emplace_back(pcavis, "pca-vis");

  // Each subcommand binds the same RunConfig fields; only one is ever parsed.
  common(explain, 5);
  explain->add_option("--highlight", cfg.highlight, "Draw only this cluster, others gray");
  common(explain_cls, 10);
  explain_cls->add_option("--model", cfg.model, "Reuse a saved model instead of fitting");
  explain_cls->add_option("--highlight", cfg.highlight, "Draw only this cluster, others gray");
  common(eval, 5);
  eval->add_option("--annotations", cfg.annotations, "Annotations JSON")->required();
  eval->add_option("--strategy", cfg.strategy, "inner | outer")->capture_default_str();
  eval->add_option("--connectivity", cfg.connectivity, "4 or 8")->capture_default_str();
  eval->add_option("--maps", cfg.maps_dir, "Evaluate label files from a previous explain run");
  eval->add_flag("--csv", cfg.csv, "Also write report.csv");
  common(patches, 10);
  patches->add_option("--model", cfg.model, "Reuse a saved model instead of fitting");
  patches->add_option("--cluster", cfg.cluster, "Cluster id to extract")->required();
  patches->add_option("--min-area", cfg.min_area, "Smallest component, in map sites")->capture_default_str();
  patches->add_option("--connectivity", cfg.connectivity, "4 or 8")->capture_default_str();
  common(avg, 5);
  avg->add_option("--runs", cfg.runs, "Number of seeds averaged")->capture_default_str();
  common(pcavis, 5);
  pcavis->add_option("--ks", cfg.ks, "Cluster/component counts to compare")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  CLI::App* active = nullptr;
  for (auto& [sub, name] : subs) {
    if (sub->parsed()) {
      active = sub;
      cfg.command = name;
    }
  }

  Context ctx;
  ctx.out = &out;
  ctx.err = &err;
  try {
    if (!config_path.empty()) apply_config_file(config_path, *active);
    if (active->get_option("--k")->count() == 0) cfg.k = default_k_of[active];
    ctx.cfg = cfg;
    prepare(ctx);
    int code = kOk;
    if (cfg.command == "explain") code = cmd_explain(ctx);
    else if (cfg.command == "explain-class") code = cmd_explain_class(ctx);
    else if (cfg.command == "eval-loc") code = cmd_eval_loc(ctx);
    else if (cfg.command == "patches") code = cmd_patches(ctx);
    else if (cfg.command == "avg-color") code = cmd_avg_color(ctx);
    else code = cmd_pca_vis(ctx);
    write_run_record(ctx, *active);
    return code;
  } catch (const UsageError& e) {
    ctx.outputs.rollback();
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ArgumentError& e) {
    ctx.outputs.rollback();
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ValidationError& e) {
    ctx.outputs.rollback();
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const FormatError& e) {
    ctx.outputs.rollback();
    err << "data error: " << e.what() << "\n";
    return kData;
  } catch (const IoError& e) {
    ctx.outputs.rollback();
    err << "data error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    ctx.outputs.rollback();
    err << "internal error: " << e.what() << "\n";
    return kInternal;
  }
}

}  // namespace nave::cli
