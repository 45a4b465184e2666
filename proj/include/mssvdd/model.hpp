#ifndef MSSVDD_MODEL_HPP
#define MSSVDD_MODEL_HPP

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "mssvdd/datamodel.hpp"
#include "mssvdd/error.hpp"
#include "mssvdd/kernel.hpp"
#include "mssvdd/subspace.hpp"
#include "mssvdd/svdd.hpp"

namespace mssvdd {

/// Per-feature z-scoring fitted on training columns. Zero-variance features
/// keep unit scale.
struct Standardizer {
  Vector mean;
  Vector scale;

  static Standardizer fit(const Matrix& f) {
    Standardizer s;
    s.mean = f.rowwise().mean();
    const Matrix c = f.colwise() - s.mean;
    s.scale = (c.rowwise().squaredNorm() / static_cast<double>(f.cols())).cwiseSqrt();
    for (Eigen::Index i = 0; i < s.scale.size(); ++i)
      if (!(s.scale(i) > 0.0)) s.scale(i) = 1.0;
    return s;
  }

  Matrix apply(const Matrix& f) const {
    return (f.colwise() - mean).array().colwise() / scale.array();
  }
};

/// A trained one-class model of any supported method.
///
/// Views: ms_svdd trains one view per modality; the uni-modal methods
/// (svdd, ocsvm, s_svdd) concatenate all modalities into a single view.
struct Model {
  TrainConfig config;
  std::vector<Eigen::Index> modality_dims;
  std::vector<Standardizer> scalers;    // per modality, when config.normalize
  std::vector<NptState> npt_states;     // per view, when config.kernelized
  std::vector<ProjectionMatrix> projections;  // per view, subspace methods only
  std::optional<DataDescription> svdd;  // every method except ocsvm
  std::optional<OcsvmDescription> ocsvm;
  std::size_t iterations_completed = 0;
  double max_orthonormality_error = 0.0;
  std::string warning;

  std::size_t view_count() const { return config.view_count(modality_dims.size()); }
};

struct Prediction {
  std::vector<Label> fused;
  std::vector<std::vector<Label>> per_view;  // [view][sample]
  std::vector<std::vector<double>> scores;   // distance_sq (SVDD) or decision value (OC-SVM)
  double radius_sq = 0.0;                    // 0 for OC-SVM
  bool scores_are_distances = true;
};

namespace detail {

inline std::vector<Matrix> assemble_views(const Model& model, const MultiModalDataset& data) {
  std::vector<Matrix> mods;
  for (std::size_t v = 0; v < data.modality_count(); ++v) {
    Matrix m = data.modality(v).values();
    if (!model.scalers.empty() && m.cols() > 0) m = model.scalers[v].apply(m);
    mods.push_back(std::move(m));
  }
  if (model.config.method == Method::ms_svdd) return mods;
  Eigen::Index rows = 0;
  for (const auto& m : mods) rows += m.rows();
  Matrix joined(rows, mods.front().cols());
  Eigen::Index r = 0;
  for (const auto& m : mods) {
    joined.middleRows(r, m.rows()) = m;
    r += m.rows();
  }
  return {std::move(joined)};
}

}  // namespace detail

/// Fits a model on target-class samples. Labels, if present, are ignored.
inline Model train(const MultiModalDataset& targets, const TrainConfig& config) {
  config.validate(targets.modality_count());
  detail::require(targets.samples() >= 1, "no target samples to train on");

  Model model;
  model.config = config;
  if (config.kernelized) model.config.kernel_params = config.effective_kernel();
  for (const auto& m : targets.modalities()) model.modality_dims.push_back(m.dims());
  if (config.normalize)
    for (const auto& m : targets.modalities()) model.scalers.push_back(Standardizer::fit(m.values()));

  auto views = detail::assemble_views(model, targets);
  if (config.kernelized) {
    for (auto& v : views) {
      model.npt_states.push_back(npt_fit(v, model.config.kernel_params, config.eig_rel_tol));
      v = model.npt_states.back().embedded;
    }
  }

  switch (config.method) {
    case Method::svdd: model.svdd = svdd_solve(views.front(), config.c_penalty, config.kkt_tol); break;
    case Method::ocsvm: model.ocsvm = ocsvm_solve(views.front(), config.nu, config.kkt_tol); break;
    case Method::s_svdd:
    case Method::ms_svdd: {
      auto fit = train_subspace(views, config);
      model.projections = std::move(fit.projections);
      model.svdd = std::move(fit.description);
      model.iterations_completed = fit.iterations_completed;
      model.max_orthonormality_error = fit.max_orthonormality_error;
      model.warning = std::move(fit.warning);
      break;
    }
  }
  return model;
}

/// Labels every sample per view and fuses the view labels with the configured
/// decision strategy.
inline Prediction predict(const Model& model, const MultiModalDataset& data) {
  if (data.modality_count() != model.modality_dims.size())
    throw InvalidArgument("model expects " + std::to_string(model.modality_dims.size()) + " modalities, got " +
                          std::to_string(data.modality_count()));
  const auto n = data.samples();
  if (n > 0)
    for (std::size_t v = 0; v < data.modality_count(); ++v)
      if (data.modality(v).dims() != model.modality_dims[v])
        throw InvalidArgument("modality " + std::to_string(v) + " has " + std::to_string(data.modality(v).dims()) +
                              " features, model expects " + std::to_string(model.modality_dims[v]));

  Prediction out;
  const auto nviews = model.view_count();
  out.per_view.assign(nviews, std::vector<Label>(n, Label::non_target));
  out.scores.assign(nviews, std::vector<double>(n, 0.0));
  out.fused.assign(n, Label::non_target);
  if (model.svdd) out.radius_sq = model.svdd->radius_sq;
  out.scores_are_distances = !model.ocsvm.has_value();
  if (n == 0) return out;

  auto views = detail::assemble_views(model, data);
  for (std::size_t v = 0; v < nviews; ++v) {
    Matrix x = views[v];
    if (!model.npt_states.empty()) x = npt_embed_test(model.npt_states[v], x);
    if (!model.projections.empty()) x = project(model.projections[v], x);
    for (std::size_t i = 0; i < n; ++i) {
      const auto col = x.col(static_cast<Eigen::Index>(i));
      bool target = false;
      if (model.ocsvm) {
        out.scores[v][i] = ocsvm_score(*model.ocsvm, col);
        target = out.scores[v][i] >= 0.0;
      } else {
        out.scores[v][i] = svdd_distance_sq(*model.svdd, col);
        target = svdd_within(out.scores[v][i], model.svdd->radius_sq);
      }
      out.per_view[v][i] = target ? Label::target : Label::non_target;
    }
  }
  const auto ds = nviews == 1 ? DecisionStrategy::ds3 : model.config.decision_strategy;
  std::vector<Label> row(nviews);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t v = 0; v < nviews; ++v) row[v] = out.per_view[v][i];
    out.fused[i] = fuse(row, ds);
  }
  return out;
}

/// Re-fuses stored per-view labels under another decision strategy.
inline std::vector<Label> refuse(const Prediction& p, DecisionStrategy ds) {
  const auto nviews = p.per_view.size();
  if (nviews == 1) return p.per_view.front();
  std::vector<Label> out(p.fused.size());
  std::vector<Label> row(nviews);
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (std::size_t v = 0; v < nviews; ++v) row[v] = p.per_view[v][i];
    out[i] = fuse(row, ds);
  }
  return out;
}

}  // namespace mssvdd

#endif  // MSSVDD_MODEL_HPP
