#include "nave/model_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "nave/error.hpp"

namespace nave {
namespace {

constexpr char kMagic[8] = {'N', 'A', 'V', 'E', 'M', 'D', 'L', '1'};
enum Kind : std::uint32_t { kKMeans = 1, kWard = 2, kPca = 3 };

struct Block {
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  std::vector<float> data;
};

class Writer {
 public:
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void block(std::uint64_t rows, std::uint64_t cols, const std::vector<double>& values) {
    u64(rows);
    u64(cols);
    for (double v : values) u32(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  void raw(const char* p, std::size_t n) { out_.append(p, n); }
  std::string take() { return std::move(out_); }

 private:
  void put(std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  std::string out_;
};

class Reader {
 public:
  Reader(const std::string& bytes, const std::string& origin) : b_(bytes), origin_(origin) {}

  std::uint64_t get(int bytes, const char* field) {
    need(static_cast<std::size_t>(bytes), field);
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) {
      v |= std::uint64_t{static_cast<unsigned char>(b_[pos_ + static_cast<std::size_t>(i)])} << (8 * i);
    }
    pos_ += static_cast<std::size_t>(bytes);
    return v;
  }
  Block block(const char* field) {
    Block blk;
    blk.rows = get(8, field);
    blk.cols = get(8, field);
    const std::uint64_t n = blk.rows * blk.cols;
    if (blk.cols != 0 && n / blk.cols != blk.rows) fail(std::string(field) + ": dims overflow");
    need(n * 4, field);
    blk.data.resize(n);
    for (auto& v : blk.data) {
      v = std::bit_cast<float>(static_cast<std::uint32_t>(get(4, field)));
      if (!std::isfinite(v)) fail(std::string(field) + ": non-finite value");
    }
    return blk;
  }
  void expect_end() {
    if (pos_ != b_.size()) fail("trailing bytes after last block");
  }
  [[noreturn]] void fail(const std::string& what) const { throw FormatError(origin_ + ": " + what); }

 private:
  void need(std::uint64_t n, const char* field) {
    if (n > b_.size() - pos_) fail(std::string(field) + ": truncated");
  }
  const std::string& b_;
  const std::string& origin_;
  std::size_t pos_ = 0;
};

Matrix to_matrix(const Block& blk) {
  Matrix m(blk.rows, blk.cols);
  for (std::size_t i = 0; i < blk.data.size(); ++i) m.data[i] = blk.data[i];
  return m;
}

void header(Writer& w, Kind kind, std::uint32_t blocks, std::uint64_t seed) {
  w.raw(kMagic, sizeof kMagic);
  w.u32(kind);
  w.u32(blocks);
  w.u64(seed);
}

}  // namespace

std::string serialize_model(const ClusterModel& model) {
  Writer w;
  if (const auto* km = std::get_if<KMeansModel>(&model)) {
    header(w, kKMeans, 2, km->seed);
    w.block(km->centroids.rows, km->centroids.cols, km->centroids.data);
    w.block(1, 3, {km->inertia, static_cast<double>(km->iterations_run), static_cast<double>(km->k)});
  } else if (const auto* wd = std::get_if<WardModel>(&model)) {
    header(w, kWard, 3, 0);
    w.block(wd->centroids.rows, wd->centroids.cols, wd->centroids.data);
    std::vector<double> merges;
    for (const WardMerge& m : wd->merges) {
      merges.insert(merges.end(), {static_cast<double>(m.a), static_cast<double>(m.b), m.cost,
                                   static_cast<double>(m.size)});
    }
    w.block(wd->merges.size(), 4, merges);
    w.block(1, 2, {static_cast<double>(wd->n_rows), static_cast<double>(wd->cut_k)});
  } else {
    const auto& pca = std::get<PcaModel>(model);
    header(w, kPca, 4, 0);
    w.block(1, pca.mean.size(), pca.mean);
    w.block(pca.components.rows, pca.components.cols, pca.components.data);
    std::vector<double> var = pca.explained_variance;
    var.push_back(pca.total_variance);
    w.block(1, var.size(), var);
    w.block(1, 1, {pca.degenerate ? 1.0 : 0.0});
  }
  return w.take();
}

ClusterModel parse_model(const std::string& bytes, const std::string& origin) {
  Reader r(bytes, origin);
  if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    r.fail("magic: not a NAVEMDL1 container");
  }
  for (std::size_t i = 0; i < sizeof kMagic; ++i) r.get(1, "magic");
  const auto kind = static_cast<std::uint32_t>(r.get(4, "kind"));
  const auto blocks = static_cast<std::uint32_t>(r.get(4, "block count"));
  const std::uint64_t seed = r.get(8, "seed");

  auto expect_blocks = [&](std::uint32_t n) {
    if (blocks != n) r.fail("block count: expected " + std::to_string(n) + ", got " + std::to_string(blocks));
  };

  if (kind == kKMeans) {
    expect_blocks(2);
    KMeansModel m;
    m.seed = seed;
    m.centroids = to_matrix(r.block("centroids"));
    const Block meta = r.block("meta");
    if (meta.data.size() != 3) r.fail("meta: expected 3 values");
    m.inertia = meta.data[0];
    m.iterations_run = static_cast<std::size_t>(meta.data[1]);
    m.k = static_cast<std::size_t>(meta.data[2]);
    if (m.k != m.centroids.rows || m.k < 2) r.fail("centroids: row count does not match K");
    r.expect_end();
    return m;
  }
  if (kind == kWard) {
    expect_blocks(3);
    WardModel m;
    m.centroids = to_matrix(r.block("centroids"));
    const Block merges = r.block("merges");
    const Block meta = r.block("meta");
    if (merges.cols != 4) r.fail("merges: expected 4 columns");
    if (meta.data.size() != 2) r.fail("meta: expected 2 values");
    m.n_rows = static_cast<std::size_t>(meta.data[0]);
    m.cut_k = static_cast<std::size_t>(meta.data[1]);
    for (std::size_t i = 0; i < merges.rows; ++i) {
      const float* v = merges.data.data() + 4 * i;
      m.merges.push_back({static_cast<std::size_t>(v[0]), static_cast<std::size_t>(v[1]), v[2],
                          static_cast<std::size_t>(v[3])});
    }
    if (m.cut_k != m.centroids.rows) r.fail("centroids: row count does not match cut K");
    r.expect_end();
    try {
      m.labels = ward_cut(m.merges, m.n_rows, m.cut_k);
    } catch (const ArgumentError& e) {
      r.fail(std::string("merges: ") + e.what());
    }
    return m;
  }
  if (kind == kPca) {
    expect_blocks(4);
    PcaModel m;
    const Block mean = r.block("mean");
    m.mean.assign(mean.data.begin(), mean.data.end());
    m.components = to_matrix(r.block("components"));
    const Block var = r.block("variance");
    const Block meta = r.block("meta");
    if (m.components.cols != m.mean.size()) r.fail("components: dimension does not match mean");
    if (var.data.size() != m.components.rows + 1) r.fail("variance: length does not match k");
    m.explained_variance.assign(var.data.begin(), var.data.end() - 1);
    m.total_variance = var.data.back();
    if (meta.data.size() != 1) r.fail("meta: expected 1 value");
    m.degenerate = meta.data[0] != 0.0f;
    r.expect_end();
    return m;
  }
  r.fail("kind: unknown model kind " + std::to_string(kind));
}

void save_model(const ClusterModel& model, const std::filesystem::path& path) {
  const std::string bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

ClusterModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str(), path.string());
}

}  // namespace nave
