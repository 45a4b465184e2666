#ifndef MSSVDD_SVDD_HPP
#define MSSVDD_SVDD_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "mssvdd/datamodel.hpp"
#include "mssvdd/error.hpp"

namespace mssvdd {

inline constexpr double kAlphaTol = 1e-8;

struct QpResult {
  Vector alpha;
  double kkt_violation = 0.0;
  std::size_t iterations = 0;
};

/// Minimizes 0.5 a'Ha + p'a over {0 <= a <= upper, sum(a) = 1} with pairwise
/// (SMO-style) updates on the maximal violating pair. Stops once
///   max_{a_i < upper} (-g_i) - min_{a_j > 0} (-g_j) < kkt_tol.
inline QpResult solve_box_simplex_qp(const Matrix& h, const Vector& p, double upper, double kkt_tol,
                                     std::size_t max_sweeps = 10000) {
  const auto m = h.rows();
  detail::require(m >= 1 && h.cols() == m && p.size() == m, "QP dimensions disagree");
  detail::require(kkt_tol > 0.0, "KKT tolerance must be positive");
  if (upper * static_cast<double>(m) < 1.0 - 1e-12)
    throw InvalidArgument("infeasible box bound: " + std::to_string(upper) + " * " + std::to_string(m) + " < 1");

  QpResult res;
  res.alpha = Vector::Constant(m, 1.0 / static_cast<double>(m));
  if (upper < 1.0 / static_cast<double>(m)) res.alpha.setConstant(upper);
  Vector g = h * res.alpha + p;

  const std::size_t max_iter = max_sweeps * static_cast<std::size_t>(m);
  auto violation = [&](Eigen::Index& up, Eigen::Index& low) {
    double best_up = -std::numeric_limits<double>::infinity();
    double best_low = std::numeric_limits<double>::infinity();
    up = low = -1;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (res.alpha(i) < upper && -g(i) > best_up) best_up = -g(i), up = i;
      if (res.alpha(i) > 0.0 && -g(i) < best_low) best_low = -g(i), low = i;
    }
    return (up < 0 || low < 0) ? 0.0 : best_up - best_low;
  };

  for (;;) {
    Eigen::Index i = -1, j = -1;
    double gap = violation(i, j);
    if (gap < kkt_tol) {
      // Refresh the gradient to discard accumulated rounding before accepting.
      g = h * res.alpha + p;
      gap = violation(i, j);
      if (gap < kkt_tol) {
        res.kkt_violation = std::max(gap, 0.0);
        return res;
      }
    }
    if (res.iterations++ >= max_iter)
      throw NumericalError("QP solver did not converge; KKT violation " + std::to_string(gap));

    // Move t from alpha_j to alpha_i.
    const double curvature = h(i, i) + h(j, j) - 2.0 * h(i, j);
    const double room_i = upper - res.alpha(i);
    const double room_j = res.alpha(j);
    double t = curvature > 1e-12 ? (g(j) - g(i)) / curvature : std::numeric_limits<double>::infinity();
    t = std::min({t, room_i, room_j});
    if (t == room_i) {
      res.alpha(j) -= t;
      res.alpha(i) = upper;
    } else if (t == room_j) {
      res.alpha(i) += t;
      res.alpha(j) = 0.0;
    } else {
      res.alpha(i) += t;
      res.alpha(j) -= t;
    }
    g += t * (h.col(i) - h.col(j));
  }
}

/// Hypersphere data description over a set of points (linear inner product).
struct DataDescription {
  Vector alphas;
  double c_penalty = 1.0;
  double radius_sq = 0.0;
  std::vector<std::size_t> support;   // alpha > kAlphaTol
  std::vector<std::size_t> boundary;  // kAlphaTol < alpha < C - kAlphaTol
  Matrix train_points;                // d x M
  Vector center;                      // sum_i alpha_i y_i
  double center_norm_sq = 0.0;        // alpha' G alpha

  Eigen::Index dims() const { return train_points.rows(); }
};

/// Recomputes the derived members (center, support sets, radius) from alphas.
inline void finalize_description(DataDescription& desc);

/// |y|^2 - 2 sum_i alpha_i y_i'y + alpha'G alpha.
template <class Derived>
double svdd_distance_sq(const DataDescription& desc, const Eigen::MatrixBase<Derived>& y) {
  if (y.size() != desc.dims())
    throw InvalidArgument("point has dimension " + std::to_string(y.size()) + ", description expects " +
                          std::to_string(desc.dims()));
  return y.squaredNorm() - 2.0 * desc.center.dot(y) + desc.center_norm_sq;
}

/// Relative slack on the boundary test. R^2 is an average over boundary
/// support vectors, so a point lying on the sphere can exceed it by rounding.
inline constexpr double kBoundaryRelTol = 1e-10;

/// Boundary inclusive, up to kBoundaryRelTol.
inline bool svdd_within(double distance_sq, double radius_sq) {
  return distance_sq <= radius_sq + kBoundaryRelTol * std::max(1.0, std::abs(radius_sq));
}

template <class Derived>
bool svdd_is_target(const DataDescription& desc, const Eigen::MatrixBase<Derived>& y) {
  return svdd_within(svdd_distance_sq(desc, y), desc.radius_sq);
}

inline void finalize_description(DataDescription& desc) {
  const auto m = desc.alphas.size();
  desc.center = desc.train_points * desc.alphas;
  desc.center_norm_sq = desc.center.squaredNorm();
  desc.support.clear();
  desc.boundary.clear();
  for (Eigen::Index i = 0; i < m; ++i) {
    const double a = desc.alphas(i);
    if (a > kAlphaTol) desc.support.push_back(static_cast<std::size_t>(i));
    if (a > kAlphaTol && a < desc.c_penalty - kAlphaTol) desc.boundary.push_back(static_cast<std::size_t>(i));
  }
  double r2 = 0.0;
  if (!desc.boundary.empty()) {
    for (auto i : desc.boundary) r2 += svdd_distance_sq(desc, desc.train_points.col(static_cast<Eigen::Index>(i)));
    r2 /= static_cast<double>(desc.boundary.size());
  } else {
    for (auto i : desc.support)
      r2 = std::max(r2, svdd_distance_sq(desc, desc.train_points.col(static_cast<Eigen::Index>(i))));
  }
  desc.radius_sq = std::max(r2, 0.0);
}

/// Maximizes sum_i a_i G_ii - a'Ga over {0 <= a <= C, sum(a) = 1}.
inline DataDescription svdd_solve(const Matrix& points, double c_penalty, double kkt_tol = 1e-6) {
  const auto m = points.cols();
  detail::require(m >= 1, "SVDD needs at least one point");
  detail::require(points.allFinite(), "SVDD input contains non-finite values");
  if (c_penalty * static_cast<double>(m) < 1.0 - 1e-12)
    throw InvalidArgument("infeasible C: C * M = " + std::to_string(c_penalty * static_cast<double>(m)) + " < 1");
  const Matrix gram = points.transpose() * points;
  auto qp = solve_box_simplex_qp(2.0 * gram, -gram.diagonal(), c_penalty, kkt_tol);
  DataDescription desc;
  desc.alphas = std::move(qp.alpha);
  desc.c_penalty = c_penalty;
  desc.train_points = points;
  finalize_description(desc);
  return desc;
}

/// One-class SVM (hyperplane through the feature-space origin) on a linear Gram.
struct OcsvmDescription {
  Vector alphas;
  double nu = 0.5;
  double rho = 0.0;
  Matrix train_points;
  Vector weight;  // sum_j alpha_j y_j

  Eigen::Index dims() const { return train_points.rows(); }
};

inline void finalize_ocsvm(OcsvmDescription& desc) { desc.weight = desc.train_points * desc.alphas; }

/// sum_j alpha_j y_j'y - rho; target iff >= 0.
template <class Derived>
double ocsvm_score(const OcsvmDescription& desc, const Eigen::MatrixBase<Derived>& y) {
  if (y.size() != desc.dims())
    throw InvalidArgument("point has dimension " + std::to_string(y.size()) + ", description expects " +
                          std::to_string(desc.dims()));
  return desc.weight.dot(y) - desc.rho;
}

/// Minimizes 0.5 a'Ga over {0 <= a <= 1/(nu M), sum(a) = 1}. rho is the mean
/// of (Ga)_i over free multipliers, or the midpoint of the bound-group limits.
inline OcsvmDescription ocsvm_solve(const Matrix& points, double nu, double kkt_tol = 1e-6) {
  const auto m = points.cols();
  detail::require(m >= 1, "OC-SVM needs at least one point");
  detail::require(nu > 0.0 && nu <= 1.0, "nu must lie in (0, 1]");
  if (nu * static_cast<double>(m) < 1.0 - 1e-12)
    throw InvalidArgument("infeasible nu: nu * M = " + std::to_string(nu * static_cast<double>(m)) + " < 1");
  const double upper = 1.0 / (nu * static_cast<double>(m));
  const Matrix gram = points.transpose() * points;
  auto qp = solve_box_simplex_qp(gram, Vector::Zero(m), upper, kkt_tol);
  OcsvmDescription desc;
  desc.alphas = std::move(qp.alpha);
  desc.nu = nu;
  desc.train_points = points;
  const Vector g = gram * desc.alphas;
  double free_sum = 0.0;
  std::size_t free_count = 0;
  double at_upper = -std::numeric_limits<double>::infinity();  // g_i <= rho
  double at_zero = std::numeric_limits<double>::infinity();    // g_i >= rho
  for (Eigen::Index i = 0; i < m; ++i) {
    const double a = desc.alphas(i);
    if (a > kAlphaTol && a < upper - kAlphaTol) {
      free_sum += g(i);
      ++free_count;
    } else if (a >= upper - kAlphaTol) {
      at_upper = std::max(at_upper, g(i));
    } else {
      at_zero = std::min(at_zero, g(i));
    }
  }
  if (free_count) desc.rho = free_sum / static_cast<double>(free_count);
  else if (std::isinf(at_zero)) desc.rho = at_upper;
  else if (std::isinf(at_upper)) desc.rho = at_zero;
  else desc.rho = 0.5 * (at_upper + at_zero);
  finalize_ocsvm(desc);
  return desc;
}

}  // namespace mssvdd

#endif  // MSSVDD_SVDD_HPP
