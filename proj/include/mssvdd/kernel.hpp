#ifndef MSSVDD_KERNEL_HPP
#define MSSVDD_KERNEL_HPP

#include <Eigen/Dense>

#include <cmath>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "mssvdd/datamodel.hpp"
#include "mssvdd/error.hpp"

namespace mssvdd {

enum class KernelKind { linear, gaussian, composite };

inline std::string_view to_string(KernelKind k) {
  switch (k) {
    case KernelKind::linear: return "linear";
    case KernelKind::gaussian: return "gaussian";
    case KernelKind::composite: return "composite";
  }
  return "?";
}

inline KernelKind parse_kernel_kind(std::string_view s) {
  if (s == "linear") return KernelKind::linear;
  if (s == "gaussian") return KernelKind::gaussian;
  if (s == "composite") return KernelKind::composite;
  throw InvalidArgument("unknown kernel '" + std::string(s) + "'");
}

/// gamma * exp(-|a-b|^2 / (2 sigma^2)) + (1 - gamma) * tanh(kappa a.b + theta)
struct KernelParams {
  KernelKind kind = KernelKind::linear;
  double gamma = 0.5;
  double sigma = 1.0;
  double kappa = 1.0;
  double theta = 0.0;

  void validate() const {
    if (kind == KernelKind::linear) return;
    detail::require(sigma > 0.0 && std::isfinite(sigma), "kernel sigma must be positive");
    detail::require(gamma >= 0.0 && gamma <= 1.0, "kernel gamma must lie in [0, 1]");
    detail::require(std::isfinite(kappa) && std::isfinite(theta), "kernel kappa/theta must be finite");
  }

  friend bool operator==(const KernelParams&, const KernelParams&) = default;
};

/// Kernel value for one pair. Bitwise symmetric in (a, b).
template <class A, class B>
double kernel_value(const KernelParams& p, const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  const double dot = a.dot(b);
  switch (p.kind) {
    case KernelKind::linear: return dot;
    case KernelKind::gaussian: return std::exp(-(a - b).squaredNorm() / (2.0 * p.sigma * p.sigma));
    case KernelKind::composite:
      return p.gamma * std::exp(-(a - b).squaredNorm() / (2.0 * p.sigma * p.sigma)) +
             (1.0 - p.gamma) * std::tanh(p.kappa * dot + p.theta);
  }
  return 0.0;
}

/// N x N kernel matrix; each unordered pair is evaluated once and mirrored.
inline Matrix kernel_matrix(const Matrix& f, const KernelParams& p) {
  p.validate();
  const auto n = f.cols();
  Matrix k(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i <= j; ++i) k(i, j) = k(j, i) = kernel_value(p, f.col(i), f.col(j));
  return k;
}

inline Matrix kernel_matrix(const FeatureMatrix& f, const KernelParams& p) { return kernel_matrix(f.values(), p); }

/// N x M kernel between training columns and test columns.
inline Matrix cross_kernel(const Matrix& train, const Matrix& test, const KernelParams& p) {
  Matrix k(train.cols(), test.cols());
  for (Eigen::Index j = 0; j < test.cols(); ++j)
    for (Eigen::Index i = 0; i < train.cols(); ++i) k(i, j) = kernel_value(p, train.col(i), test.col(j));
  return k;
}

struct CenteredKernel {
  Matrix centered;
  Vector row_means;  // column means of K (K is symmetric)
  double grand_mean = 0.0;
};

/// (I - 11'/N) K (I - 11'/N), written entrywise.
inline CenteredKernel center_kernel(const Matrix& k) {
  detail::require(k.rows() == k.cols(), "kernel matrix must be square");
  const auto n = k.rows();
  CenteredKernel out;
  out.row_means = k.colwise().mean().transpose();
  out.grand_mean = out.row_means.mean();
  out.centered.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      out.centered(i, j) = k(i, j) - out.row_means(i) - out.row_means(j) + out.grand_mean;
  return out;
}

/// Explicit finite-dimensional embedding of a training set under a kernel.
struct NptState {
  KernelParams params;
  Matrix train_data;   // D x N
  Matrix train_kernel; // N x N, uncentered
  Vector row_means;
  double grand_mean = 0.0;
  Matrix eigvecs;  // N x r
  Vector eigvals;  // r, positive, descending
  Matrix embedded; // r x N
  double discarded_negative_mass = 0.0;  // sum of |lambda| over dropped negative eigenvalues

  Eigen::Index rank() const { return eigvals.size(); }
};

/// Eigendecomposes the centered kernel and keeps eigenvalues above
/// eig_rel_tol * lambda_max (and above zero). The embedding is
/// A^{1/2} U' which equals A^{-1/2} U' Khat on the kept spectrum.
inline NptState npt_fit(const Matrix& f, const KernelParams& params, double eig_rel_tol = 1e-12) {
  detail::require(f.cols() >= 2, "kernel embedding needs at least two samples");
  detail::require(eig_rel_tol >= 0.0, "eigenvalue tolerance must be non-negative");
  NptState s;
  s.params = params;
  s.train_data = f;
  s.train_kernel = kernel_matrix(f, params);
  auto c = center_kernel(s.train_kernel);
  s.row_means = std::move(c.row_means);
  s.grand_mean = c.grand_mean;

  Eigen::SelfAdjointEigenSolver<Matrix> eig(c.centered);
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition of centered kernel failed");
  const auto n = f.cols();
  // Eigen returns ascending order.
  const double lambda_max = eig.eigenvalues()(n - 1);
  if (!(lambda_max > 0.0)) throw NumericalError("degenerate kernel: no positive eigenvalue");
  const double cutoff = eig_rel_tol * lambda_max;
  std::vector<Eigen::Index> kept;
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    const double l = eig.eigenvalues()(i);
    if (l > 0.0 && l > cutoff) kept.push_back(i);
    else if (l < 0.0) s.discarded_negative_mass -= l;
  }
  const auto r = static_cast<Eigen::Index>(kept.size());
  s.eigvecs.resize(n, r);
  s.eigvals.resize(r);
  for (Eigen::Index k = 0; k < r; ++k) {
    s.eigvecs.col(k) = eig.eigenvectors().col(kept[static_cast<std::size_t>(k)]);
    s.eigvals(k) = eig.eigenvalues()(kept[static_cast<std::size_t>(k)]);
  }
  s.embedded = s.eigvals.cwiseSqrt().asDiagonal() * s.eigvecs.transpose();
  return s;
}

inline NptState npt_fit(const FeatureMatrix& f, const KernelParams& params, double eig_rel_tol = 1e-12) {
  return npt_fit(f.values(), params, eig_rel_tol);
}

/// Embeds test columns: phi(x) = A^{-1/2} U' (I - 11'/N)(k_x - K1/N).
inline Matrix npt_embed_test(const NptState& s, const Matrix& test) {
  if (test.cols() == 0) return Matrix(s.rank(), 0);
  if (test.rows() != s.train_data.rows())
    throw InvalidArgument("test data has " + std::to_string(test.rows()) + " features, model expects " +
                          std::to_string(s.train_data.rows()));
  Matrix k = cross_kernel(s.train_data, test, s.params);
  for (Eigen::Index j = 0; j < k.cols(); ++j) {
    const double col_mean = k.col(j).mean();
    for (Eigen::Index i = 0; i < k.rows(); ++i) k(i, j) = k(i, j) - s.row_means(i) - col_mean + s.grand_mean;
  }
  return s.eigvals.cwiseSqrt().cwiseInverse().asDiagonal() * (s.eigvecs.transpose() * k);
}

inline Matrix npt_embed_test(const NptState& s, const FeatureMatrix& test) { return npt_embed_test(s, test.values()); }

}  // namespace mssvdd

#endif  // MSSVDD_KERNEL_HPP
