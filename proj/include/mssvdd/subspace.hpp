#ifndef MSSVDD_SUBSPACE_HPP
#define MSSVDD_SUBSPACE_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mssvdd/datamodel.hpp"
#include "mssvdd/error.hpp"
#include "mssvdd/kernel.hpp"
#include "mssvdd/svdd.hpp"

namespace mssvdd {

// ---------------------------------------------------------------------------
// Configuration enums

enum class Method { svdd, ocsvm, s_svdd, ms_svdd };
enum class UpdateStrategy { sd_minus, sd_plus, ad_minus_plus, ad_plus_minus };
enum class Regularizer { omega0, omega1, omega2, omega3, omega4, omega5, omega6, psi0, psi1, psi2, psi3 };
enum class DecisionStrategy { ds1, ds2, ds3, ds4 };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::svdd: return "svdd";
    case Method::ocsvm: return "ocsvm";
    case Method::s_svdd: return "s_svdd";
    case Method::ms_svdd: return "ms_svdd";
  }
  return "?";
}

inline std::string_view to_string(UpdateStrategy s) {
  switch (s) {
    case UpdateStrategy::sd_minus: return "SD-";
    case UpdateStrategy::sd_plus: return "SD+";
    case UpdateStrategy::ad_minus_plus: return "AD-+";
    case UpdateStrategy::ad_plus_minus: return "AD+-";
  }
  return "?";
}

inline std::string_view to_string(Regularizer r) {
  static constexpr std::string_view names[] = {"omega0", "omega1", "omega2", "omega3", "omega4", "omega5",
                                                "omega6", "psi0",   "psi1",   "psi2",   "psi3"};
  return names[static_cast<int>(r)];
}

inline std::string_view to_string(DecisionStrategy d) {
  static constexpr std::string_view names[] = {"ds1", "ds2", "ds3", "ds4"};
  return names[static_cast<int>(d)];
}

inline Method parse_method(std::string_view s) {
  for (auto m : {Method::svdd, Method::ocsvm, Method::s_svdd, Method::ms_svdd})
    if (to_string(m) == s) return m;
  throw InvalidArgument("unknown method '" + std::string(s) + "'");
}

inline UpdateStrategy parse_update_strategy(std::string_view s) {
  for (auto u : {UpdateStrategy::sd_minus, UpdateStrategy::sd_plus, UpdateStrategy::ad_minus_plus,
                 UpdateStrategy::ad_plus_minus})
    if (to_string(u) == s) return u;
  throw InvalidArgument("unknown update strategy '" + std::string(s) + "'");
}

inline Regularizer parse_regularizer(std::string_view s) {
  for (int i = 0; i <= static_cast<int>(Regularizer::psi3); ++i)
    if (to_string(static_cast<Regularizer>(i)) == s) return static_cast<Regularizer>(i);
  throw InvalidArgument("unknown regularizer '" + std::string(s) + "'");
}

inline DecisionStrategy parse_decision_strategy(std::string_view s) {
  for (int i = 0; i < 4; ++i)
    if (to_string(static_cast<DecisionStrategy>(i)) == s) return static_cast<DecisionStrategy>(i);
  throw InvalidArgument("unknown decision strategy '" + std::string(s) + "'");
}

inline bool is_psi(Regularizer r) { return r >= Regularizer::psi0; }

/// ω0 and ψ0 carry no regularization; β is ignored for them.
inline bool is_unregularized(Regularizer r) { return r == Regularizer::omega0 || r == Regularizer::psi0; }

// ---------------------------------------------------------------------------

struct TrainConfig {
  Method method = Method::ms_svdd;
  std::size_t d = 2;
  double eta = 1e-3;
  double beta = 1e-2;
  double c_penalty = 0.1;
  double nu = 0.1;  // OC-SVM only
  std::size_t max_iter = 20;
  UpdateStrategy update_strategy = UpdateStrategy::sd_minus;
  Regularizer regularizer = Regularizer::omega0;
  bool kernelized = false;
  KernelParams kernel_params{};
  bool kappa_from_d = true;  // kappa := 1/d
  DecisionStrategy decision_strategy = DecisionStrategy::ds1;
  bool normalize = false;  // z-score each feature on the training portion
  double kkt_tol = 1e-6;
  double eig_rel_tol = 1e-12;

  bool uses_subspace() const { return method == Method::s_svdd || method == Method::ms_svdd; }

  /// Number of separate views the model trains on for V input modalities.
  std::size_t view_count(std::size_t modalities) const { return method == Method::ms_svdd ? modalities : 1; }

  KernelParams effective_kernel() const {
    KernelParams k = kernel_params;
    if (kappa_from_d && d > 0) k.kappa = 1.0 / static_cast<double>(d);
    return k;
  }

  void validate(std::size_t modalities) const {
    const auto views = view_count(modalities);
    detail::require(modalities >= 1, "at least one modality is required");
    detail::require(kkt_tol > 0.0, "kkt_tol must be positive");
    if (kernelized) effective_kernel().validate();
    if (method == Method::ocsvm) detail::require(nu > 0.0 && nu <= 1.0, "nu must lie in (0, 1]");
    else detail::require(c_penalty > 0.0, "C must be positive");
    if (uses_subspace()) {
      detail::require(d >= 1, "subspace dimensionality d must be at least 1");
      detail::require(eta >= 0.0 && std::isfinite(eta), "learning rate must be non-negative");
      detail::require(beta >= 0.0 && std::isfinite(beta), "beta must be non-negative");
      detail::require(max_iter >= 1, "max_iter must be at least 1");
      if (update_strategy == UpdateStrategy::ad_minus_plus || update_strategy == UpdateStrategy::ad_plus_minus)
        detail::require(views == 2, "asymmetric update strategies require exactly two modalities");
      if (views == 1)
        detail::require(is_psi(regularizer), "single-view subspace models take a psi regularizer");
      else
        detail::require(!is_psi(regularizer), "multi-view subspace models take an omega regularizer");
    }
    // Single-view models ignore the decision strategy.
    if (decision_strategy == DecisionStrategy::ds4 && method == Method::ms_svdd)
      detail::require(views >= 2, "decision strategy ds4 needs a second modality");
  }
};

// ---------------------------------------------------------------------------
// Projection matrices

/// d x D matrix with orthonormal rows.
class ProjectionMatrix {
public:
  ProjectionMatrix() = default;
  explicit ProjectionMatrix(Matrix q) : q_(std::move(q)) {
    detail::require(q_.rows() >= 1 && q_.rows() <= q_.cols(), "projection must satisfy 1 <= d <= D");
  }
  const Matrix& q() const { return q_; }
  Eigen::Index d() const { return q_.rows(); }
  Eigen::Index input_dims() const { return q_.cols(); }

private:
  Matrix q_;
};

inline double orthonormality_error(const ProjectionMatrix& q) {
  return (q.q() * q.q().transpose() - Matrix::Identity(q.d(), q.d())).cwiseAbs().maxCoeff();
}

/// Rows are the top-d eigenvectors of the column-centered covariance, largest
/// eigenvalue first, each row signed so its largest-magnitude entry is positive.
inline ProjectionMatrix pca_init(const Matrix& f, std::size_t d) {
  const auto dim = f.rows();
  const auto n = f.cols();
  detail::require(d >= 1 && static_cast<Eigen::Index>(d) <= std::min(dim, n),
                  "PCA dimensionality d = " + std::to_string(d) + " exceeds min(D, N) = " +
                      std::to_string(std::min(dim, n)));
  const Matrix centered = f.colwise() - f.rowwise().mean();
  const Matrix cov = centered * centered.transpose() / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  if (eig.info() != Eigen::Success) throw NumericalError("covariance eigendecomposition failed");
  Matrix q(static_cast<Eigen::Index>(d), dim);
  for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(d); ++k) {
    Vector row = eig.eigenvectors().col(dim - 1 - k);
    Eigen::Index arg = 0;
    row.cwiseAbs().maxCoeff(&arg);
    if (row(arg) < 0.0) row = -row;
    q.row(k) = row.transpose();
  }
  return ProjectionMatrix(std::move(q));
}

inline Matrix project(const ProjectionMatrix& q, const Matrix& f) {
  if (q.input_dims() != f.rows())
    throw InvalidArgument("projection expects " + std::to_string(q.input_dims()) + " features, got " +
                          std::to_string(f.rows()));
  return q.q() * f;
}

/// Rows of the thin Q factor of q_raw'. Signs are chosen so that R has a
/// positive diagonal, i.e. every output row has positive inner product with
/// the matching input row; an orthonormal input is returned unchanged.
inline ProjectionMatrix orthonormalize(const Matrix& q_raw) {
  const auto d = q_raw.rows();
  const auto dim = q_raw.cols();
  detail::require(d >= 1 && d <= dim, "orthonormalize expects d <= D");
  if (!q_raw.allFinite()) throw NumericalError("projection contains non-finite values");
  Eigen::HouseholderQR<Matrix> qr(q_raw.transpose());
  const Matrix r = qr.matrixQR().topRows(d).triangularView<Eigen::Upper>();
  const double scale = std::max(1.0, q_raw.rowwise().norm().maxCoeff());
  Matrix thin = qr.householderQ() * Matrix::Identity(dim, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    if (std::abs(r(k, k)) < 1e-12 * scale) throw NumericalError("projection rows are rank deficient");
    if (r(k, k) < 0.0) thin.col(k) = -thin.col(k);
  }
  return ProjectionMatrix(thin.transpose());
}

inline double update_sign(UpdateStrategy s, std::size_t view) {
  switch (s) {
    case UpdateStrategy::sd_minus: return -1.0;
    case UpdateStrategy::sd_plus: return 1.0;
    case UpdateStrategy::ad_minus_plus: return view == 0 ? -1.0 : 1.0;
    case UpdateStrategy::ad_plus_minus: return view == 0 ? 1.0 : -1.0;
  }
  return -1.0;
}

/// Q + sign * eta * grad, re-orthonormalized. A zero step returns Q untouched.
inline ProjectionMatrix update_projection(const ProjectionMatrix& q, const Matrix& grad, double eta, double sign) {
  if (grad.rows() != q.d() || grad.cols() != q.input_dims())
    throw InvalidArgument("gradient shape does not match projection");
  if (eta == 0.0) return q;
  return orthonormalize(q.q() + sign * eta * grad);
}

// ---------------------------------------------------------------------------
// Gradient

/// Per-sample weights lambda (length N*V) for the chosen regularizer.
inline Vector regularizer_weights(Regularizer reg, const Vector& alphas, double c_penalty) {
  const auto m = alphas.size();
  Vector w = Vector::Zero(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double a = alphas(i);
    const bool sv = a > kAlphaTol;
    const bool boundary = sv && a < c_penalty - kAlphaTol;
    switch (reg) {
      case Regularizer::omega0:
      case Regularizer::psi0: break;
      case Regularizer::omega1:
      case Regularizer::omega4:
      case Regularizer::psi1: w(i) = 1.0; break;
      case Regularizer::omega2:
      case Regularizer::omega5: w(i) = sv ? 1.0 : 0.0; break;
      case Regularizer::omega3:
      case Regularizer::omega6: w(i) = a; break;
      case Regularizer::psi2: w(i) = boundary ? a : 0.0; break;
      case Regularizer::psi3: w(i) = sv ? a : 0.0; break;
    }
  }
  return w;
}

/// Gradient of L(Q) + beta * omega(Q) with respect to the projection of view v.
///
///   dL = 2 Q_v F_v diag(a_v) F_v' - 2 a (F_v a_v)'      with a = sum_n Q_n F_n a_n
///
/// Regularizer gradients (Ft_v = F_v diag(lambda_v)):
///   omega1-3:  2 Q_v Ft_v Ft_v'
///   omega4-6:  2 (sum_n Q_n Ft_n) Ft_v'
///   psi1-3:    2 (Q F lambda)(F lambda)'
inline Matrix lagrangian_gradient(std::size_t v, std::span<const ProjectionMatrix> projections,
                                  std::span<const Matrix> views, const Vector& alphas, double beta,
                                  Regularizer reg, double c_penalty) {
  const std::size_t nviews = views.size();
  detail::require(projections.size() == nviews && v < nviews, "view index out of range");
  const auto n = views[0].cols();
  if (alphas.size() != n * static_cast<Eigen::Index>(nviews))
    throw InvalidArgument("alpha length " + std::to_string(alphas.size()) + " != N*V = " +
                          std::to_string(n * static_cast<Eigen::Index>(nviews)));
  const Matrix& fv = views[v];
  const Matrix& qv = projections[v].q();
  const auto av = alphas.segment(static_cast<Eigen::Index>(v) * n, n);

  Vector center = Vector::Zero(qv.rows());
  for (std::size_t k = 0; k < nviews; ++k)
    center += projections[k].q() * (views[k] * alphas.segment(static_cast<Eigen::Index>(k) * n, n));

  Matrix grad = 2.0 * (qv * fv) * av.asDiagonal() * fv.transpose() - 2.0 * center * (fv * av).transpose();

  if (beta == 0.0 || is_unregularized(reg)) return grad;

  const Vector lambda = regularizer_weights(reg, alphas, c_penalty);
  const auto lv = lambda.segment(static_cast<Eigen::Index>(v) * n, n);
  switch (reg) {
    case Regularizer::omega1:
    case Regularizer::omega2:
    case Regularizer::omega3: {
      const Matrix ft = fv * lv.asDiagonal();
      grad += beta * 2.0 * (qv * ft) * ft.transpose();
      break;
    }
    case Regularizer::omega4:
    case Regularizer::omega5:
    case Regularizer::omega6: {
      Matrix s = Matrix::Zero(qv.rows(), n);
      for (std::size_t k = 0; k < nviews; ++k)
        s += projections[k].q() * views[k] * lambda.segment(static_cast<Eigen::Index>(k) * n, n).asDiagonal();
      grad += beta * 2.0 * s * (fv * lv.asDiagonal()).transpose();
      break;
    }
    case Regularizer::psi1:
    case Regularizer::psi2:
    case Regularizer::psi3: {
      const Vector fl = fv * lv;
      grad += beta * 2.0 * (qv * fl) * fl.transpose();
      break;
    }
    default: break;
  }
  return grad;
}

// ---------------------------------------------------------------------------
// Fusion

/// ds1 = AND, ds2 = OR, ds3 = first view, ds4 = second view.
inline Label fuse(std::span<const Label> per_view, DecisionStrategy ds) {
  detail::require(!per_view.empty(), "fusion needs at least one view label");
  switch (ds) {
    case DecisionStrategy::ds1:
      return std::all_of(per_view.begin(), per_view.end(), [](Label l) { return l == Label::target; })
                 ? Label::target
                 : Label::non_target;
    case DecisionStrategy::ds2:
      return std::any_of(per_view.begin(), per_view.end(), [](Label l) { return l == Label::target; })
                 ? Label::target
                 : Label::non_target;
    case DecisionStrategy::ds3: return per_view[0];
    case DecisionStrategy::ds4:
      detail::require(per_view.size() >= 2, "ds4 needs a second modality");
      return per_view[1];
  }
  return Label::non_target;
}

// ---------------------------------------------------------------------------
// Alternating optimization

struct SubspaceFit {
  std::vector<ProjectionMatrix> projections;
  DataDescription description;
  std::size_t iterations_completed = 0;
  double max_orthonormality_error = 0.0;  // over every update cycle
  bool stopped_early = false;
  std::string warning;
};

inline Matrix pool_projections(std::span<const ProjectionMatrix> projections, std::span<const Matrix> views) {
  const auto n = views[0].cols();
  const auto d = projections[0].d();
  Matrix pooled(d, n * static_cast<Eigen::Index>(views.size()));
  for (std::size_t v = 0; v < views.size(); ++v)
    pooled.middleCols(static_cast<Eigen::Index>(v) * n, n) = project(projections[v], views[v]);
  return pooled;
}

/// PCA init, then max_iter rounds of {project, pool, solve SVDD, per view:
/// gradient, signed step, QR}. A final solve fixes the description. If a
/// round fails (solver error or non-finite gradient) the last valid
/// projections are kept and the fit is flagged.
inline SubspaceFit train_subspace(std::span<const Matrix> views, const TrainConfig& cfg) {
  detail::require(!views.empty(), "no views to train on");
  const auto n = views[0].cols();
  for (const auto& v : views) detail::require(v.cols() == n, "views disagree on sample count");
  detail::require(n >= 1, "no training samples");

  SubspaceFit fit;
  for (const auto& v : views) fit.projections.push_back(pca_init(v, cfg.d));
  for (const auto& q : fit.projections)
    fit.max_orthonormality_error = std::max(fit.max_orthonormality_error, orthonormality_error(q));

  for (std::size_t t = 0; t < cfg.max_iter; ++t) {
    std::vector<ProjectionMatrix> next = fit.projections;
    try {
      const auto desc = svdd_solve(pool_projections(fit.projections, views), cfg.c_penalty, cfg.kkt_tol);
      for (std::size_t v = 0; v < views.size(); ++v) {
        const Matrix grad = lagrangian_gradient(v, next, views, desc.alphas, cfg.beta, cfg.regularizer, cfg.c_penalty);
        if (!grad.allFinite()) throw NumericalError("non-finite gradient for view " + std::to_string(v));
        next[v] = update_projection(next[v], grad, cfg.eta, update_sign(cfg.update_strategy, v));
      }
    } catch (const Error& e) {
      fit.stopped_early = true;
      fit.warning = "iteration " + std::to_string(t + 1) + ": " + e.what();
      break;
    }
    for (const auto& q : next)
      fit.max_orthonormality_error = std::max(fit.max_orthonormality_error, orthonormality_error(q));
    fit.projections = std::move(next);
    ++fit.iterations_completed;
  }
  fit.description = svdd_solve(pool_projections(fit.projections, views), cfg.c_penalty, cfg.kkt_tol);
  return fit;
}

}  // namespace mssvdd

#endif  // MSSVDD_SUBSPACE_HPP
