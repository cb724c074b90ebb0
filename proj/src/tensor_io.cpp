#include "nave/tensor_io.hpp"

#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>

#include "nave/error.hpp"

namespace nave {
namespace {

constexpr char kMagic[] = "\x93NUMPY";
constexpr std::size_t kMagicLen = 6;
constexpr std::size_t kPreamble = kMagicLen + 2 + 2;  // magic, version, u16 length

struct NpyHeader {
  std::string descr;
  bool fortran_order = false;
  std::vector<long long> shape;
  bool has_descr = false, has_fortran = false, has_shape = false;
};

// Just enough of a Python-literal parser for the header dict numpy writes.
class HeaderParser {
 public:
  HeaderParser(std::string_view text, const std::string& origin) : s_(text), origin_(origin) {}

  NpyHeader parse() {
    NpyHeader h;
    expect('{');
    while (true) {
      skip_ws();
      if (peek() == '}') {
        ++pos_;
        break;
      }
      const std::string key = parse_string("header key");
      expect(':');
      if (key == "descr") {
        h.descr = parse_string("descr");
        h.has_descr = true;
      } else if (key == "fortran_order") {
        h.fortran_order = parse_bool("fortran_order");
        h.has_fortran = true;
      } else if (key == "shape") {
        h.shape = parse_tuple();
        h.has_shape = true;
      } else {
        fail("header: unexpected key '" + key + "'");
      }
      skip_ws();
      if (peek() == ',') {
        ++pos_;
      } else if (peek() != '}') {
        fail("header: expected ',' or '}'");
      }
    }
    if (!h.has_descr) fail("descr: missing");
    if (!h.has_fortran) fail("fortran_order: missing");
    if (!h.has_shape) fail("shape: missing");
    return h;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError(origin_ + ": " + what);
  }
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  char peek() {
    skip_ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }
  void expect(char c) {
    if (peek() != c) fail(std::string("header: expected '") + c + "'");
    ++pos_;
  }
  std::string parse_string(const char* field) {
    const char q = peek();
    if (q != '\'' && q != '"') fail(std::string(field) + ": expected quoted string");
    const auto end = s_.find(q, pos_ + 1);
    if (end == std::string_view::npos) fail(std::string(field) + ": unterminated string");
    std::string out(s_.substr(pos_ + 1, end - pos_ - 1));
    pos_ = end + 1;
    return out;
  }
  bool parse_bool(const char* field) {
    skip_ws();
    if (s_.substr(pos_, 4) == "True") {
      pos_ += 4;
      return true;
    }
    if (s_.substr(pos_, 5) == "False") {
      pos_ += 5;
      return false;
    }
    fail(std::string(field) + ": expected True or False");
  }
  std::vector<long long> parse_tuple() {
    expect('(');
    std::vector<long long> dims;
    while (true) {
      if (peek() == ')') {
        ++pos_;
        return dims;
      }
      const std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (start == pos_) fail("shape: expected non-negative integer");
      dims.push_back(std::stoll(std::string(s_.substr(start, pos_ - start))));
      if (peek() == 'L') ++pos_;  // Python 2 longs
      if (peek() == ',') {
        ++pos_;
      } else if (peek() != ')') {
        fail("shape: expected ',' or ')'");
      }
    }
  }

  std::string_view s_;
  const std::string& origin_;
  std::size_t pos_ = 0;
};

Shape3 parse_header(const std::string& bytes, const std::string& origin, std::size_t* data_offset) {
  if (bytes.size() < kPreamble || std::memcmp(bytes.data(), kMagic, kMagicLen) != 0) {
    throw FormatError(origin + ": magic: not an NPY file");
  }
  const auto major = static_cast<unsigned char>(bytes[6]);
  const auto minor = static_cast<unsigned char>(bytes[7]);
  if (major != 1 || minor != 0) {
    throw FormatError(origin + ": version: expected 1.0, got " + std::to_string(major) + "." +
                      std::to_string(minor));
  }
  const std::size_t header_len = static_cast<unsigned char>(bytes[8]) |
                                 (static_cast<std::size_t>(static_cast<unsigned char>(bytes[9])) << 8);
  if (bytes.size() < kPreamble + header_len) {
    throw FormatError(origin + ": header: truncated");
  }
  const NpyHeader h =
      HeaderParser(std::string_view(bytes).substr(kPreamble, header_len), origin).parse();
  if (h.descr != "<f4") {
    throw FormatError(origin + ": descr: element type must be '<f4', got '" + h.descr + "'");
  }
  if (h.fortran_order) {
    throw FormatError(origin + ": fortran_order: must be False");
  }
  if (h.shape.size() != 3) {
    throw FormatError(origin + ": shape: rank must be 3, got " + std::to_string(h.shape.size()));
  }
  for (long long d : h.shape) {
    if (d < 1) throw FormatError(origin + ": shape: every dimension must be >= 1");
  }
  *data_offset = kPreamble + header_len;
  return {static_cast<std::size_t>(h.shape[0]), static_cast<std::size_t>(h.shape[1]),
          static_cast<std::size_t>(h.shape[2])};
}

std::string read_file(const std::filesystem::path& path, std::optional<std::size_t> limit = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::string bytes;
  if (limit) {
    bytes.resize(*limit);
    in.read(bytes.data(), static_cast<std::streamsize>(*limit));
    bytes.resize(static_cast<std::size_t>(in.gcount()));
  } else {
    std::ostringstream ss;
    ss << in.rdbuf();
    bytes = std::move(ss).str();
  }
  return bytes;
}

}  // namespace

void TensorRecord::validate() const {
  if (shape.channels < 1 || shape.height < 1 || shape.width < 1) {
    throw ValidationError("tensor: every dimension must be >= 1");
  }
  if (data.size() != shape.size()) {
    throw ValidationError("tensor: data length " + std::to_string(data.size()) +
                          " does not match shape product " + std::to_string(shape.size()));
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data[i])) {
      throw ValidationError("tensor: non-finite value at flat index " + std::to_string(i));
    }
  }
}

TensorRecord parse_tensor(const std::string& bytes, const std::string& origin) {
  std::size_t offset = 0;
  TensorRecord t;
  t.shape = parse_header(bytes, origin, &offset);
  const std::size_t n = t.shape.size();
  if (bytes.size() - offset != n * sizeof(float)) {
    throw FormatError(origin + ": data: expected " + std::to_string(n * sizeof(float)) +
                      " bytes, found " + std::to_string(bytes.size() - offset));
  }
  t.data.resize(n);
  const auto* src = reinterpret_cast<const unsigned char*>(bytes.data() + offset);
  for (std::size_t i = 0; i < n; ++i, src += 4) {
    const std::uint32_t bits = std::uint32_t{src[0]} | (std::uint32_t{src[1]} << 8) |
                               (std::uint32_t{src[2]} << 16) | (std::uint32_t{src[3]} << 24);
    t.data[i] = std::bit_cast<float>(bits);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(t.data[i])) {
      throw FormatError(origin + ": data: non-finite value at flat index " + std::to_string(i));
    }
  }
  return t;
}

std::string serialize_tensor(const TensorRecord& t) {
  t.validate();
  std::ostringstream dict;
  dict << "{'descr': '<f4', 'fortran_order': False, 'shape': (" << t.shape.channels << ", "
       << t.shape.height << ", " << t.shape.width << "), }";
  std::string header = dict.str();
  // numpy pads with spaces so that preamble + header + '\n' is a multiple of 64.
  const std::size_t total = kPreamble + header.size() + 1;
  header.append((64 - total % 64) % 64, ' ');
  header.push_back('\n');

  std::string out(kMagic, kMagicLen);
  out.push_back('\x01');
  out.push_back('\x00');
  out.push_back(static_cast<char>(header.size() & 0xff));
  out.push_back(static_cast<char>((header.size() >> 8) & 0xff));
  out += header;
  const std::size_t offset = out.size();
  out.resize(offset + t.data.size() * sizeof(float));
  char* dst = out.data() + offset;
  for (float v : t.data) {
    auto bits = std::bit_cast<std::uint32_t>(v);
    for (int b = 0; b < 4; ++b) *dst++ = static_cast<char>((bits >> (8 * b)) & 0xff);
  }
  return out;
}

TensorRecord read_tensor(const std::filesystem::path& path) {
  return parse_tensor(read_file(path), path.string());
}

Shape3 read_tensor_shape(const std::filesystem::path& path) {
  std::string head = read_file(path, kPreamble);
  if (head.size() == kPreamble && std::memcmp(head.data(), kMagic, kMagicLen) == 0) {
    const std::size_t header_len = static_cast<unsigned char>(head[8]) |
                                   (static_cast<std::size_t>(static_cast<unsigned char>(head[9])) << 8);
    head = read_file(path, kPreamble + header_len);
  }
  std::size_t offset = 0;
  return parse_header(head, path.string(), &offset);
}

void write_tensor(const TensorRecord& t, const std::filesystem::path& path) {
  const std::string bytes = serialize_tensor(t);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace nave
