#ifndef MSSVDD_EVAL_HPP
#define MSSVDD_EVAL_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "mssvdd/datamodel.hpp"
#include "mssvdd/error.hpp"
#include "mssvdd/model.hpp"
#include "mssvdd/subspace.hpp"

namespace mssvdd {

// ---------------------------------------------------------------------------
// Metrics

/// Positive class = target.
struct ConfusionMatrix {
  std::size_t tp = 0, fn = 0, fp = 0, tn = 0;

  std::size_t total() const { return tp + fn + fp + tn; }
  ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
    tp += o.tp, fn += o.fn, fp += o.fp, tn += o.tn;
    return *this;
  }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct MetricSet {
  double sen = 0, spe = 0, pre = 0, f1 = 0, acc = 0, gm = 0;
};

inline ConfusionMatrix confusion(std::span<const Label> truth, std::span<const Label> predicted) {
  detail::require(truth.size() == predicted.size(), "truth and prediction lengths differ");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool t = truth[i] == Label::target;
    const bool p = predicted[i] == Label::target;
    if (t && p) ++cm.tp;
    else if (t) ++cm.fn;
    else if (p) ++cm.fp;
    else ++cm.tn;
  }
  return cm;
}

/// Every 0/0 ratio evaluates to 0.
inline MetricSet compute_metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw InvalidArgument("empty confusion matrix");
  auto ratio = [](double num, double den) { return den > 0.0 ? num / den : 0.0; };
  const double tp = static_cast<double>(cm.tp), fn = static_cast<double>(cm.fn);
  const double fp = static_cast<double>(cm.fp), tn = static_cast<double>(cm.tn);
  MetricSet m;
  m.sen = ratio(tp, tp + fn);
  m.spe = ratio(tn, tn + fp);
  m.pre = ratio(tp, tp + fp);
  m.f1 = ratio(2.0 * m.pre * m.sen, m.pre + m.sen);
  m.acc = ratio(tp + tn, static_cast<double>(cm.total()));
  m.gm = std::sqrt(m.sen * m.spe);
  return m;
}

inline MetricSet mean_metrics(std::span<const MetricSet> sets) {
  MetricSet m;
  if (sets.empty()) return m;
  for (const auto& s : sets) {
    m.sen += s.sen, m.spe += s.spe, m.pre += s.pre;
    m.f1 += s.f1, m.acc += s.acc, m.gm += s.gm;
  }
  const double n = static_cast<double>(sets.size());
  m.sen /= n, m.spe /= n, m.pre /= n, m.f1 /= n, m.acc /= n, m.gm /= n;
  return m;
}

// ---------------------------------------------------------------------------
// Workers

/// Worker count from MSSVDD_WORKERS, else the hardware concurrency.
inline std::size_t default_worker_count() {
  if (const char* env = std::getenv("MSSVDD_WORKERS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, count). Results must be written to slot i only.
inline void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
}

// ---------------------------------------------------------------------------
// Cross-validation

struct FoldResult {
  std::size_t fold = 0;
  TrainConfig config;
  ConfusionMatrix cm;
  MetricSet metrics;
};

struct EvalReport {
  std::string name;
  std::vector<FoldResult> folds;
  MetricSet mean;                // average of per-fold metrics
  ConfusionMatrix pooled;        // summed over folds
  MetricSet pooled_metrics;
  double max_orthonormality_error = 0.0;
};

inline void finish_report(EvalReport& r) {
  std::vector<MetricSet> per_fold;
  r.pooled = {};
  for (const auto& f : r.folds) {
    per_fold.push_back(f.metrics);
    r.pooled += f.cm;
  }
  r.mean = mean_metrics(per_fold);
  r.pooled_metrics = compute_metrics(r.pooled);
}

/// Per fold: train on the target samples of the training part, predict every
/// test sample (both classes).
struct FoldPrediction {
  std::vector<Label> truth;
  Prediction prediction;
  double max_orthonormality_error = 0.0;
};

inline FoldPrediction predict_fold(const MultiModalDataset& data, const TrainConfig& config, const FoldPlan& plan,
                                   std::size_t fold) {
  const auto train_idx = plan.train_indices(fold);
  const auto test_idx = plan.test_indices(fold);
  const auto model = train(data.subset(train_idx).targets_only(), config);
  const auto test = data.subset(test_idx);
  return {test.labels(), predict(model, test), model.max_orthonormality_error};
}

inline EvalReport run_cv(const MultiModalDataset& data, const TrainConfig& config, const FoldPlan& plan) {
  detail::require(plan.assignment.size() == data.samples(), "fold plan does not cover the dataset");
  EvalReport report;
  for (std::size_t f = 0; f < plan.k; ++f) {
    auto fp = predict_fold(data, config, plan, f);
    FoldResult r{f, config, confusion(fp.truth, fp.prediction.fused), {}};
    r.metrics = compute_metrics(r.cm);
    report.folds.push_back(r);
    report.max_orthonormality_error = std::max(report.max_orthonormality_error, fp.max_orthonormality_error);
  }
  finish_report(report);
  return report;
}

inline EvalReport run_cv(const MultiModalDataset& data, const TrainConfig& config, std::size_t k, std::uint64_t seed) {
  const auto& labels = data.labels();
  const bool has_both = std::count(labels.begin(), labels.end(), Label::target) > 0 &&
                        std::count(labels.begin(), labels.end(), Label::non_target) > 0;
  detail::require(has_both, "cross-validation needs samples of both classes");
  return run_cv(data, config, stratified_folds(labels, k, seed));
}

// ---------------------------------------------------------------------------
// Grid search

struct GridSpec {
  std::vector<double> sigma{1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3};
  std::vector<double> eta{1e-4, 1e-3, 1e-2, 1e-1, 1.0};
  std::vector<double> beta{1e-4, 1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3, 1e4};
  std::vector<double> c{0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  std::vector<double> nu{0.05, 0.1, 0.2, 0.3, 0.4, 0.5};
  std::vector<std::size_t> d{1, 2, 3, 4, 5};
  std::vector<UpdateStrategy> updates{UpdateStrategy::sd_minus, UpdateStrategy::sd_plus,
                                      UpdateStrategy::ad_minus_plus, UpdateStrategy::ad_plus_minus};
  std::vector<Regularizer> regularizers{Regularizer::omega0, Regularizer::omega1, Regularizer::omega2,
                                        Regularizer::omega3, Regularizer::omega4, Regularizer::omega5,
                                        Regularizer::omega6, Regularizer::psi0,   Regularizer::psi1,
                                        Regularizer::psi2,   Regularizer::psi3};
  std::vector<DecisionStrategy> decisions{DecisionStrategy::ds1, DecisionStrategy::ds2, DecisionStrategy::ds3,
                                          DecisionStrategy::ds4};

  void validate() const {
    detail::require(!sigma.empty() && !eta.empty() && !beta.empty() && !c.empty() && !nu.empty() && !d.empty() &&
                        !updates.empty() && !regularizers.empty() && !decisions.empty(),
                    "every grid axis needs at least one value");
  }
};

/// Grid cells for the method in `base`. Axes the method does not use collapse
/// to the base value; strategy combinations the view count forbids are skipped.
/// Enumeration order: sigma, d, C, nu, eta, beta, update, regularizer, decision.
inline std::vector<TrainConfig> expand_grid(const TrainConfig& base, const GridSpec& grid, std::size_t modalities) {
  grid.validate();
  const bool subspace = base.uses_subspace();
  const bool gaussian_part = base.kernelized && base.kernel_params.kind != KernelKind::linear;
  const bool d_matters = subspace || (base.kernelized && base.kappa_from_d &&
                                      base.kernel_params.kind == KernelKind::composite);
  const auto views = base.view_count(modalities);

  auto axis = [](bool used, const auto& values, auto fallback) {
    using T = std::decay_t<decltype(fallback)>;
    return used ? std::vector<T>(values.begin(), values.end()) : std::vector<T>{fallback};
  };
  const auto sigmas = axis(gaussian_part, grid.sigma, base.kernel_params.sigma);
  const auto ds_ = axis(d_matters, grid.d, base.d);
  const auto cs = axis(base.method != Method::ocsvm, grid.c, base.c_penalty);
  const auto nus = axis(base.method == Method::ocsvm, grid.nu, base.nu);
  const auto etas = axis(subspace, grid.eta, base.eta);
  const auto updates = axis(subspace, grid.updates, base.update_strategy);
  const auto decisions = axis(views >= 2, grid.decisions, base.decision_strategy);

  std::vector<Regularizer> regs;
  if (subspace) {
    for (auto r : grid.regularizers)
      if (is_psi(r) == (views == 1)) regs.push_back(r);
    detail::require(!regs.empty(), "no regularizer in the grid applies to this view count");
  } else {
    regs.push_back(base.regularizer);
  }

  std::vector<TrainConfig> cells;
  for (double sigma : sigmas)
    for (auto d : ds_)
      for (double c : cs)
        for (double nu : nus)
          for (double eta : etas)
            for (auto upd : updates) {
              const bool ad = upd == UpdateStrategy::ad_minus_plus || upd == UpdateStrategy::ad_plus_minus;
              if (subspace && ad && views != 2) continue;
              for (auto reg : regs) {
                const auto betas = axis(subspace && !is_unregularized(reg), grid.beta, base.beta);
                for (double beta : betas)
                  for (auto ds : decisions) {
                    if (ds == DecisionStrategy::ds4 && views < 2) continue;
                    TrainConfig c2 = base;
                    c2.kernel_params.sigma = sigma;
                    c2.d = d;
                    c2.c_penalty = c;
                    c2.nu = nu;
                    c2.eta = eta;
                    c2.beta = beta;
                    c2.update_strategy = upd;
                    c2.regularizer = reg;
                    c2.decision_strategy = ds;
                    cells.push_back(c2);
                  }
              }
            }
  return cells;
}

struct GridCellScore {
  TrainConfig config;
  bool ok = false;
  double mean_gm = 0.0;
  std::vector<double> fold_gm;
  std::string error;
};

struct GridSearchResult {
  TrainConfig best;
  double best_score = 0.0;
  std::vector<GridCellScore> table;  // grid order
  double max_orthonormality_error = 0.0;
};

namespace detail {

inline bool same_training(const TrainConfig& x, const TrainConfig& b) {
  return x.method == b.method && x.d == b.d && x.eta == b.eta && x.beta == b.beta && x.c_penalty == b.c_penalty &&
         x.nu == b.nu && x.max_iter == b.max_iter && x.update_strategy == b.update_strategy &&
         x.regularizer == b.regularizer && x.kernelized == b.kernelized && x.kernel_params == b.kernel_params &&
         x.kappa_from_d == b.kappa_from_d && x.normalize == b.normalize && x.kkt_tol == b.kkt_tol &&
         x.eig_rel_tol == b.eig_rel_tol;
}

}  // namespace detail

/// Scores every cell by mean inner-fold GM and returns the argmax. Ties go to
/// smaller d, then smaller C, then smaller eta, then earlier grid position.
/// Cells that differ only in decision strategy share one set of trained models.
inline GridSearchResult grid_search(const MultiModalDataset& data, const TrainConfig& base, const GridSpec& grid,
                                    std::size_t inner_k, std::uint64_t seed,
                                    std::size_t workers = default_worker_count()) {
  const auto cells = expand_grid(base, grid, data.modality_count());
  const auto plan = stratified_folds(data.labels(), inner_k, seed);

  // Group consecutive cells sharing a training configuration.
  std::vector<std::size_t> group_start;
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (i == 0 || !detail::same_training(cells[i], cells[group_start.back()])) group_start.push_back(i);
  group_start.push_back(cells.size());

  GridSearchResult result;
  result.table.resize(cells.size());
  std::vector<double> orth(group_start.size() - 1, 0.0);
  parallel_for(group_start.size() - 1, workers, [&](std::size_t g) {
    const auto lo = group_start[g], hi = group_start[g + 1];
    for (auto i = lo; i < hi; ++i) result.table[i].config = cells[i];
    std::vector<FoldPrediction> folds;
    try {
      for (std::size_t f = 0; f < plan.k; ++f) {
        folds.push_back(predict_fold(data, cells[lo], plan, f));
        orth[g] = std::max(orth[g], folds.back().max_orthonormality_error);
      }
    } catch (const std::exception& e) {
      for (auto i = lo; i < hi; ++i) result.table[i].error = e.what();
      return;
    }
    for (auto i = lo; i < hi; ++i) {
      auto& cell = result.table[i];
      for (const auto& fp : folds) {
        const auto labels = refuse(fp.prediction, cells[i].decision_strategy);
        cell.fold_gm.push_back(compute_metrics(confusion(fp.truth, labels)).gm);
      }
      double sum = 0.0;
      for (double x : cell.fold_gm) sum += x;
      cell.mean_gm = sum / static_cast<double>(cell.fold_gm.size());
      cell.ok = true;
    }
  });
  for (double o : orth) result.max_orthonormality_error = std::max(result.max_orthonormality_error, o);

  std::optional<std::size_t> best;
  auto better = [&](std::size_t a, std::size_t b) {
    const auto &x = result.table[a], &y = result.table[b];
    if (x.mean_gm != y.mean_gm) return x.mean_gm > y.mean_gm;
    if (x.config.d != y.config.d) return x.config.d < y.config.d;
    if (x.config.c_penalty != y.config.c_penalty) return x.config.c_penalty < y.config.c_penalty;
    if (x.config.eta != y.config.eta) return x.config.eta < y.config.eta;
    return a < b;
  };
  for (std::size_t i = 0; i < result.table.size(); ++i)
    if (result.table[i].ok && (!best || better(i, *best))) best = i;
  if (!best) {
    std::string msg = "every grid cell failed:";
    for (std::size_t i = 0; i < result.table.size() && i < 20; ++i) msg += "\n  cell " + std::to_string(i) + ": " + result.table[i].error;
    if (result.table.size() > 20) msg += "\n  ...";
    throw NumericalError(msg);
  }
  result.best = result.table[*best].config;
  result.best_score = result.table[*best].mean_gm;
  return result;
}

enum class Selection { nested, global };

/// Outer stratified CV with hyperparameters chosen by inner grid search.
/// nested: a separate search on each outer training part (the outer test part
/// is never seen). global: one search on the whole dataset, then plain CV.
inline EvalReport nested_cv(const MultiModalDataset& data, const TrainConfig& base, const GridSpec& grid,
                            std::size_t outer_k, std::size_t inner_k, std::uint64_t seed,
                            Selection mode = Selection::nested, std::size_t workers = default_worker_count()) {
  if (mode == Selection::global) {
    const auto gs = grid_search(data, base, grid, inner_k, seed, workers);
    auto report = run_cv(data, gs.best, outer_k, seed);
    report.max_orthonormality_error = std::max(report.max_orthonormality_error, gs.max_orthonormality_error);
    return report;
  }
  const auto plan = stratified_folds(data.labels(), outer_k, seed);
  EvalReport report;
  for (std::size_t f = 0; f < plan.k; ++f) {
    const auto gs = grid_search(data.subset(plan.train_indices(f)), base, grid, inner_k, seed, workers);
    auto fp = predict_fold(data, gs.best, plan, f);
    FoldResult r{f, gs.best, confusion(fp.truth, fp.prediction.fused), {}};
    r.metrics = compute_metrics(r.cm);
    report.folds.push_back(r);
    report.max_orthonormality_error =
        std::max({report.max_orthonormality_error, gs.max_orthonormality_error, fp.max_orthonormality_error});
  }
  finish_report(report);
  return report;
}

}  // namespace mssvdd

#endif  // MSSVDD_EVAL_HPP
