#include "nave/pca.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "nave/error.hpp"

namespace nave {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void fix_sign(std::span<double> v) {
  std::size_t arg = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (std::abs(v[i]) > std::abs(v[arg])) arg = i;
  }
  if (v[arg] < 0.0) {
    for (double& x : v) x = -x;
  }
}

// Eigenpairs of a symmetric matrix, largest eigenvalue first.
void top_eigen(const Eigen::MatrixXd& sym, std::size_t k, Eigen::MatrixXd* vecs, Eigen::VectorXd* vals) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  if (es.info() != Eigen::Success) throw Error("pca: eigendecomposition failed");
  const auto n = sym.rows();
  *vecs = Eigen::MatrixXd(n, static_cast<Eigen::Index>(k));
  *vals = Eigen::VectorXd(static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i) {
    const auto src = n - 1 - static_cast<Eigen::Index>(i);
    vecs->col(static_cast<Eigen::Index>(i)) = es.eigenvectors().col(src);
    (*vals)(static_cast<Eigen::Index>(i)) = std::max(0.0, es.eigenvalues()(src));
  }
}

// Block power iteration with Rayleigh-Ritz on the centered data; the D x D
// covariance is never formed.
void subspace_eigen(const RowMat& centered, std::size_t k, const PcaOptions& opt, double denom,
                    Eigen::MatrixXd* vecs, Eigen::VectorXd* vals) {
  const auto dim = centered.cols();
  const auto block = static_cast<Eigen::Index>(std::min<std::size_t>(k + 8, static_cast<std::size_t>(dim)));
  // Deterministic start: a fixed quasi-random fill.
  Eigen::MatrixXd q(dim, block);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < block; ++j) {
      q(i, j) = std::sin(static_cast<double>((i + 1) * (j + 3)) * 0.7548776662466927) +
                (i == j ? 1.0 : 0.0);
    }
  }
  q = Eigen::HouseholderQR<Eigen::MatrixXd>(q).householderQ() * Eigen::MatrixXd::Identity(dim, block);

  Eigen::VectorXd prev = Eigen::VectorXd::Zero(block);
  Eigen::MatrixXd ritz_vecs;
  Eigen::VectorXd ritz_vals;
  for (std::size_t it = 0; it < opt.subspace_max_iter; ++it) {
    Eigen::MatrixXd z = centered.transpose() * (centered * q) / denom;
    q = Eigen::HouseholderQR<Eigen::MatrixXd>(z).householderQ() * Eigen::MatrixXd::Identity(dim, block);
    const Eigen::MatrixXd small = q.transpose() * (centered.transpose() * (centered * q)) / denom;
    top_eigen(small, static_cast<std::size_t>(block), &ritz_vecs, &ritz_vals);
    const double scale = std::max(ritz_vals(0), 1e-300);
    const double change = (ritz_vals - prev).head(static_cast<Eigen::Index>(k)).cwiseAbs().maxCoeff() / scale;
    prev = ritz_vals;
    if (it > 0 && change < opt.subspace_tol) {
      // Residual check on the wanted pairs.
      const Eigen::MatrixXd v = q * ritz_vecs.leftCols(static_cast<Eigen::Index>(k));
      const Eigen::MatrixXd cv = centered.transpose() * (centered * v) / denom;
      double worst = 0.0;
      for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(k); ++j) {
        worst = std::max(worst, (cv.col(j) - ritz_vals(j) * v.col(j)).norm() / scale);
      }
      if (worst < opt.subspace_tol) break;
    }
  }
  *vecs = q * ritz_vecs.leftCols(static_cast<Eigen::Index>(k));
  *vals = ritz_vals.head(static_cast<Eigen::Index>(k)).cwiseMax(0.0);
}

}  // namespace

PcaModel pca_fit(const Matrix& rows, std::size_t k, const PcaOptions& options) {
  if (k < 1) throw ArgumentError("pca: k must be >= 1");
  if (k > rows.rows || k > rows.cols) {
    throw ArgumentError("pca: k=" + std::to_string(k) + " exceeds min(rows, dimension)");
  }
  const std::size_t n = rows.rows;
  const std::size_t dim = rows.cols;

  PcaModel m;
  m.mean.assign(dim, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const auto x = rows.row(r);
    for (std::size_t d = 0; d < dim; ++d) m.mean[d] += x[d];
  }
  for (double& v : m.mean) v /= static_cast<double>(n);

  RowMat centered(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t d = 0; d < dim; ++d) {
      centered(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(d)) = rows(r, d) - m.mean[d];
    }
  }
  const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
  m.total_variance = centered.squaredNorm() / denom;
  m.components = Matrix(k, dim);
  m.explained_variance.assign(k, 0.0);

  if (m.total_variance == 0.0) {
    m.degenerate = true;
    for (std::size_t i = 0; i < k; ++i) m.components(i, i) = 1.0;
    return m;
  }

  Eigen::MatrixXd vecs;
  Eigen::VectorXd vals;
  if (dim <= options.exact_max_dim) {
    const Eigen::MatrixXd cov = centered.transpose() * centered / denom;
    top_eigen(cov, k, &vecs, &vals);
  } else {
    subspace_eigen(centered, k, options, denom, &vecs, &vals);
  }
  for (std::size_t i = 0; i < k; ++i) {
    m.explained_variance[i] = vals(static_cast<Eigen::Index>(i));
    auto row = m.components.row(i);
    for (std::size_t d = 0; d < dim; ++d) {
      row[d] = vecs(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(i));
    }
    fix_sign(row);
  }
  return m;
}

Matrix pca_project(const PcaModel& model, const Matrix& rows) {
  if (rows.cols != model.mean.size()) {
    throw ArgumentError("pca project: row dimension " + std::to_string(rows.cols) +
                        " does not match model dimension " + std::to_string(model.mean.size()));
  }
  Matrix out(rows.rows, model.k());
  for (std::size_t r = 0; r < rows.rows; ++r) {
    const auto x = rows.row(r);
    for (std::size_t i = 0; i < model.k(); ++i) {
      const auto c = model.components.row(i);
      double s = 0.0;
      for (std::size_t d = 0; d < x.size(); ++d) s += (x[d] - model.mean[d]) * c[d];
      out(r, i) = s;
    }
  }
  return out;
}

std::vector<int> pca_labels(const Matrix& projected) {
  std::vector<int> labels(projected.rows, 0);
  for (std::size_t r = 0; r < projected.rows; ++r) {
    const auto p = projected.row(r);
    std::size_t arg = 0;
    for (std::size_t i = 1; i < p.size(); ++i) {
      if (std::abs(p[i]) > std::abs(p[arg])) arg = i;
    }
    labels[r] = static_cast<int>(arg);
  }
  return labels;
}

}  // namespace nave
