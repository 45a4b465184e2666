// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <random>
#include <string>

#include "mssvdd/mssvdd.hpp"
#include "oracles.hpp"

using namespace mssvdd;

namespace {

// Tolerances.
constexpr double kMetricTolPp = 0.01;
constexpr double kSvddObjTol = 1e-3;
constexpr double kSvddKktTol = 1e-6;
constexpr double kGradRelTol = 1e-4;
constexpr double kGradEntryFloor = 1e-6;
constexpr double kNptReconTol = 1e-8;
constexpr double kNptEmbedTol = 1e-8;
constexpr double kRowSumTol = 1e-10;
constexpr double kOrthTol = 1e-10;
constexpr double kGmSeparated = 0.90;
constexpr double kGmOverlapping = 0.60;

int failures = 0;

void report(int id, bool ok, const std::string& what, double seconds) {
  std::printf("[%s] criterion %d: %s (%.2f s)\n", ok ? "PASS" : "FAIL", id, what.c_str(), seconds);
  std::fflush(stdout);
  if (!ok) ++failures;
}

class Timer {
public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

/// Composite-kernel multi-modal model, one value per grid axis.
TrainConfig end_to_end_config() {
  TrainConfig c;
  c.method = Method::ms_svdd;
  c.kernelized = true;
  c.kernel_params.kind = KernelKind::composite;
  c.kernel_params.sigma = 1.0;
  c.d = 4;
  c.c_penalty = 0.3;
  c.eta = 1e-3;
  c.beta = 1e-2;
  c.regularizer = Regularizer::omega4;
  c.update_strategy = UpdateStrategy::sd_minus;
  c.decision_strategy = DecisionStrategy::ds1;
  return c;
}

MultiModalDataset end_to_end_data(double separation) { return synth_multimodal({60, 60, {4, 4}, separation, 7}); }

// 1 -------------------------------------------------------------------------
void metric_reproduction() {
  Timer t;
  struct Row {
    ConfusionMatrix cm;
    double expected[6];
  };
  const Row rows[] = {
      {{62, 26, 14, 28}, {70.45, 66.67, 81.58, 75.61, 69.23, 68.53}},
      {{28, 14, 21, 67}, {66.67, 76.14, 57.14, 61.54, 73.08, 71.24}},
  };
  double worst = 0.0;
  for (const auto& r : rows) {
    const auto m = compute_metrics(r.cm);
    const double got[6] = {m.sen, m.spe, m.pre, m.f1, m.acc, m.gm};
    for (int k = 0; k < 6; ++k) worst = std::max(worst, std::abs(100.0 * got[k] - r.expected[k]));
  }
  report(1, worst <= kMetricTolPp, fmt("metric reproduction, max deviation %.4f pp", worst), t.seconds());
}

// 2 -------------------------------------------------------------------------
void svdd_oracle() {
  Timer t;
  std::mt19937_64 gen(2024);
  const double cs[] = {0.3, 0.6, 1.0};
  double worst_gap = 0.0, worst_kkt = 0.0;
  bool never_worse = true;
  const int instances = 120;
  for (int i = 0; i < instances; ++i) {
    const double c = cs[i % 3];
    const int min_m = static_cast<int>(std::ceil(1.0 / c - 1e-9));
    std::uniform_int_distribution<int> mdist(min_m, 6), ddist(1, 3);
    const Matrix y = oracle::random_matrix(gen, ddist(gen), mdist(gen));
    const auto desc = svdd_solve(y, c);
    const double obj = oracle::svdd_dual(y, desc.alphas);
    const double grid = oracle::svdd_grid_max_fast(y, c);
    never_worse &= obj >= grid - 1e-12;
    worst_gap = std::max(worst_gap, std::abs(obj - grid));
    worst_kkt = std::max(worst_kkt, oracle::svdd_kkt_violation(y, desc.alphas, c));
  }
  report(2, never_worse && worst_gap <= kSvddObjTol && worst_kkt <= kSvddKktTol,
         fmt("SVDD vs simplex grid on %.0f instances, max |obj gap| %.2e, max KKT violation %.2e", instances,
             worst_gap, worst_kkt),
         t.seconds());
}

// 3 -------------------------------------------------------------------------
void gradient_check() {
  Timer t;
  std::mt19937_64 gen(77);
  const Regularizer omegas[] = {Regularizer::omega0, Regularizer::omega1, Regularizer::omega2, Regularizer::omega3,
                                Regularizer::omega4, Regularizer::omega5, Regularizer::omega6};
  const Regularizer psis[] = {Regularizer::psi0, Regularizer::psi1, Regularizer::psi2, Regularizer::psi3};
  const double betas[] = {0.0, 1e-3, 1e-1, 1.0, 10.0};
  double worst = 0.0;
  std::size_t compared = 0;
  for (int k = 0; k < 50; ++k) {
    const std::size_t nv = 1 + static_cast<std::size_t>(k % 3);
    const Eigen::Index n = 4 + k % 5, dim = 2 + k % 4, d = 1 + (k / 3) % dim;
    const double c = 0.25 + 0.25 * (k % 4);
    const Regularizer reg = nv == 1 ? psis[k % 4] : omegas[k % 7];
    const double beta = betas[k % 5];
    std::vector<Matrix> f, q;
    std::vector<ProjectionMatrix> pq;
    for (std::size_t v = 0; v < nv; ++v) {
      f.push_back(oracle::random_matrix(gen, dim, n, -2.0, 2.0));
      q.push_back(oracle::random_stiefel(gen, d, dim));
      pq.emplace_back(q.back());
    }
    const Vector a = oracle::random_box_simplex(gen, n * static_cast<Eigen::Index>(nv), c);
    const char family = is_psi(reg) ? 'p' : 'o';
    const int variant = is_psi(reg) ? static_cast<int>(reg) - static_cast<int>(Regularizer::psi0)
                                    : static_cast<int>(reg) - static_cast<int>(Regularizer::omega0);
    for (std::size_t v = 0; v < nv; ++v) {
      const Matrix g = lagrangian_gradient(v, pq, f, a, beta, reg, c);
      const Matrix fd = oracle::subspace_fd_gradient(v, q, f, a, beta, family, variant, c);
      for (Eigen::Index e = 0; e < fd.size(); ++e) {
        if (std::abs(fd.data()[e]) <= kGradEntryFloor) continue;
        worst = std::max(worst, std::abs(g.data()[e] - fd.data()[e]) / std::abs(fd.data()[e]));
        ++compared;
      }
    }
  }
  report(3, worst <= kGradRelTol,
         fmt("gradient vs central differences, 50 configurations, %.0f entries, max relative error %.2e",
             static_cast<double>(compared), worst),
         t.seconds());
}

// 4 -------------------------------------------------------------------------
void npt_identities() {
  Timer t;
  std::mt19937_64 gen(4242);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_recon = 0.0, worst_embed = 0.0, worst_rows = 0.0;
  for (int i = 0; i < 200; ++i) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(u(gen) * 39.0);
    const Eigen::Index dim = 1 + i % 5;
    const Matrix x = oracle::random_matrix(gen, dim, n, -2.0, 2.0);
    KernelParams p;
    p.kind = static_cast<KernelKind>(i % 3);
    p.sigma = 0.3 + 3.0 * u(gen);
    p.gamma = u(gen);
    p.kappa = 1.0 / static_cast<double>(1 + i % 5);
    p.theta = u(gen) - 0.5;
    const Matrix k = kernel_matrix(x, p);
    worst_rows = std::max(worst_rows, center_kernel(k).centered.rowwise().sum().cwiseAbs().maxCoeff());
    NptState s;
    try {
      s = npt_fit(x, p);
    } catch (const NumericalError&) {
      continue;  // all columns identical: nothing to embed
    }
    worst_embed = std::max(worst_embed, (npt_embed_test(s, x) - s.embedded).cwiseAbs().maxCoeff());
    if (p.kind != KernelKind::composite) {
      const Matrix recon = s.embedded.transpose() * s.embedded;
      worst_recon = std::max(worst_recon, (recon - oracle::double_center(k)).cwiseAbs().maxCoeff());
    }
  }
  report(4, worst_recon <= kNptReconTol && worst_embed <= kNptEmbedTol && worst_rows <= kRowSumTol,
         fmt("NPT on 200 instances, reconstruction %.2e, train-point embedding %.2e, centered row sums %.2e",
             worst_recon, worst_embed, worst_rows),
         t.seconds());
}

// 5 -------------------------------------------------------------------------
void orthonormality() {
  Timer t;
  const auto data = end_to_end_data(6.0);
  GridSpec grid;
  grid.sigma = {1.0};
  grid.d = {1, 2, 3, 4, 5};
  grid.c = {0.3};
  grid.eta = {1e-4, 1e-3, 1e-2, 1e-1, 1.0};
  grid.beta = {1e-2, 1e2};
  grid.updates = {UpdateStrategy::sd_minus, UpdateStrategy::sd_plus, UpdateStrategy::ad_minus_plus,
                  UpdateStrategy::ad_plus_minus};
  grid.regularizers = {Regularizer::omega0, Regularizer::omega1, Regularizer::omega4, Regularizer::omega6};
  grid.decisions = {DecisionStrategy::ds1, DecisionStrategy::ds2};
  const auto res = grid_search(data, end_to_end_config(), grid, 5, 7);
  std::size_t ok = 0;
  for (const auto& cell : res.table) ok += cell.ok;
  report(5, res.max_orthonormality_error <= kOrthTol,
         fmt("grid search over %.0f cells (%.0f trained), max |QQ' - I| %.2e", static_cast<double>(res.table.size()),
             static_cast<double>(ok), res.max_orthonormality_error),
         t.seconds());
}

// 6 -------------------------------------------------------------------------
void end_to_end() {
  Timer t;
  const auto cfg = end_to_end_config();
  const auto separated = run_cv(end_to_end_data(6.0), cfg, 5, 7);
  const auto overlapping = run_cv(end_to_end_data(0.0), cfg, 5, 7);
  report(6, separated.mean.gm >= kGmSeparated && overlapping.mean.gm <= kGmOverlapping,
         fmt("MS-SVDD-CK 5-fold mean GM %.4f at separation 6, %.4f at separation 0", separated.mean.gm,
             overlapping.mean.gm),
         t.seconds());
}

// 7 -------------------------------------------------------------------------
void fusion_table() {
  Timer t;
  const Label T = Label::target, N = Label::non_target;
  const std::array<std::array<Label, 2>, 4> inputs{{{T, T}, {T, N}, {N, T}, {N, N}}};
  // Expected output per decision strategy, in input order.
  const Label and_[4] = {T, N, N, N}, or_[4] = {T, T, T, N}, first[4] = {T, T, N, N}, second[4] = {T, N, T, N};
  const Label* expected[4] = {and_, or_, first, second};
  const DecisionStrategy ds[4] = {DecisionStrategy::ds1, DecisionStrategy::ds2, DecisionStrategy::ds3,
                                  DecisionStrategy::ds4};
  int passed = 0, total = 0;
  for (int s = 0; s < 4; ++s)
    for (int i = 0; i < 4; ++i, ++total) passed += fuse(inputs[static_cast<std::size_t>(i)], ds[s]) == expected[s][i];
  report(7, passed == total, fmt("fusion truth table, %.0f/%.0f assertions", passed, total), t.seconds());
}

// 8 -------------------------------------------------------------------------
void determinism_and_persistence() {
  Timer t;
  const auto data = end_to_end_data(6.0);
  const auto cfg = end_to_end_config();
  const bool same_report = report_to_csv(run_cv(data, cfg, 5, 7)) == report_to_csv(run_cv(data, cfg, 5, 7));

  GridSpec grid;
  grid.sigma = {1.0, 10.0};
  grid.d = {2, 4};
  grid.c = {0.3};
  grid.eta = {1e-3};
  grid.beta = {1e-2};
  grid.updates = {UpdateStrategy::sd_minus, UpdateStrategy::ad_minus_plus};
  grid.regularizers = {Regularizer::omega4};
  grid.decisions = {DecisionStrategy::ds1, DecisionStrategy::ds2};
  const bool same_grid =
      grid_scores_to_csv(grid_search(data, cfg, grid, 3, 9, 1)) == grid_scores_to_csv(grid_search(data, cfg, grid, 3, 9, 4));

  const auto model = train(data.targets_only(), cfg);
  const auto path = std::filesystem::temp_directory_path() / "mssvdd_acceptance_model.json";
  save_model(path, model, Provenance{7, dataset_digest(data)});
  const auto loaded = load_model(path);
  std::filesystem::remove(path);

  Rng rng(8);
  std::vector<FeatureMatrix> mods;
  for (Eigen::Index dim : {4, 4}) {
    Matrix x(dim, 1000);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = 3.0 * rng.normal();
    mods.emplace_back(std::move(x));
  }
  const MultiModalDataset probe(std::move(mods));
  const auto a = predict(model, probe);
  const auto b = predict(loaded, probe);
  bool identical = a.fused == b.fused && a.per_view == b.per_view &&
                   std::memcmp(&a.radius_sq, &b.radius_sq, sizeof(double)) == 0;
  for (std::size_t v = 0; v < a.scores.size(); ++v)
    identical &= std::memcmp(a.scores[v].data(), b.scores[v].data(), a.scores[v].size() * sizeof(double)) == 0;

  report(8, same_report && same_grid && identical,
         std::string("repeat CV report ") + (same_report ? "identical" : "DIFFERS") + ", grid scores across worker counts " +
             (same_grid ? "identical" : "DIFFER") + ", 1000-point predictions after save/load " +
             (identical ? "bit-identical" : "DIFFER"),
         t.seconds());
}

}  // namespace

int main() {
  const std::pair<int, void (*)()> criteria[] = {
      {1, metric_reproduction}, {2, svdd_oracle}, {3, gradient_check},
      {4, npt_identities},      {5, orthonormality}, {6, end_to_end},
      {7, fusion_table},        {8, determinism_and_persistence},
  };
  for (const auto& [id, fn] : criteria) {
    try {
      fn();
    } catch (const std::exception& e) {
      report(id, false, std::string("threw: ") + e.what(), 0.0);
    }
  }
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
