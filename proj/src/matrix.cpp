#include "nave/matrix.hpp"

#include <algorithm>

#include "nave/error.hpp"

namespace nave {

Matrix select_rows(const Matrix& m, std::span<const std::size_t> indices) {
  Matrix out(indices.size(), m.cols);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= m.rows) throw ArgumentError("select_rows: index out of range");
    std::copy_n(m.row(indices[i]).begin(), m.cols, out.row(i).begin());
  }
  return out;
}

Matrix vstack(std::span<const Matrix> parts) {
  if (parts.empty()) return {};
  std::size_t rows = 0;
  for (const Matrix& p : parts) {
    if (p.cols != parts.front().cols) throw ArgumentError("vstack: column counts differ");
    rows += p.rows;
  }
  Matrix out(rows, parts.front().cols);
  auto dst = out.data.begin();
  for (const Matrix& p : parts) dst = std::copy(p.data.begin(), p.data.end(), dst);
  return out;
}

}  // namespace nave
