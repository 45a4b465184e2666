#include <gtest/gtest.h>

#include <random>

#include "mssvdd/model.hpp"
#include "oracles.hpp"

using namespace mssvdd;

TEST(Pca, AxisAlignedVariance) {
  Matrix f(3, 4);
  f << 2, -2, 0, 0,  //
      0, 0, 1, -1,   //
      0, 0, 0, 0;
  const auto q = pca_init(f, 2);
  Matrix expected(2, 3);
  expected << 1, 0, 0, 0, 1, 0;
  EXPECT_TRUE(q.q().isApprox(expected, 1e-12)) << q.q();
}

TEST(Pca, SignConventionAndOrthonormality) {
  std::mt19937_64 gen(31);
  const Matrix f = oracle::random_matrix(gen, 5, 20);
  const auto q = pca_init(f, 3);
  EXPECT_LT(orthonormality_error(q), 1e-12);
  for (Eigen::Index r = 0; r < 3; ++r) {
    Eigen::Index arg;
    q.q().row(r).cwiseAbs().maxCoeff(&arg);
    EXPECT_GT(q.q()(r, arg), 0.0);
  }
  EXPECT_THROW(pca_init(f, 6), InvalidArgument);
  EXPECT_THROW(pca_init(f, 0), InvalidArgument);
}

TEST(Projection, Shapes) {
  Matrix q(2, 3);
  q << 1, 0, 0, 0, 1, 0;
  Matrix f(3, 4);
  f << 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12;
  const Matrix y = project(ProjectionMatrix(q), f);
  ASSERT_EQ(y.rows(), 2);
  ASSERT_EQ(y.cols(), 4);
  EXPECT_EQ(y(1, 3), 8.0);
  EXPECT_THROW(project(ProjectionMatrix(q), Matrix::Zero(2, 4)), InvalidArgument);
  EXPECT_THROW(ProjectionMatrix(Matrix::Zero(3, 2)), InvalidArgument);
}

TEST(Orthonormalize, DiagonalScaling) {
  Matrix q(2, 2);
  q << 2, 0, 0, 3;
  EXPECT_TRUE(orthonormalize(q).q().isApprox(Matrix::Identity(2, 2), 1e-15));
}

TEST(Orthonormalize, KeepsOrthonormalInputAndRowSigns) {
  std::mt19937_64 gen(32);
  const Matrix q = oracle::random_stiefel(gen, 3, 6);
  const Matrix out = orthonormalize(q).q();
  EXPECT_LT((out - q).cwiseAbs().maxCoeff(), 1e-12);
  const Matrix raw = oracle::random_matrix(gen, 3, 6);
  const Matrix o = orthonormalize(raw).q();
  for (Eigen::Index r = 0; r < 3; ++r) EXPECT_GT(o.row(r).dot(raw.row(r)), 0.0);
  EXPECT_LT(orthonormality_error(ProjectionMatrix(o)), 1e-12);
}

TEST(Orthonormalize, RankDeficientThrows) {
  Matrix q(2, 3);
  q << 1, 2, 3, 2, 4, 6;
  EXPECT_THROW(orthonormalize(q), NumericalError);
  Matrix nan = Matrix::Ones(1, 2);
  nan(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(orthonormalize(nan), NumericalError);
}

TEST(Update, SignAlgebra) {
  EXPECT_EQ(update_sign(UpdateStrategy::sd_minus, 0), -1.0);
  EXPECT_EQ(update_sign(UpdateStrategy::sd_minus, 1), -1.0);
  EXPECT_EQ(update_sign(UpdateStrategy::sd_plus, 0), 1.0);
  EXPECT_EQ(update_sign(UpdateStrategy::sd_plus, 1), 1.0);
  EXPECT_EQ(update_sign(UpdateStrategy::ad_minus_plus, 0), -1.0);
  EXPECT_EQ(update_sign(UpdateStrategy::ad_minus_plus, 1), 1.0);
  EXPECT_EQ(update_sign(UpdateStrategy::ad_plus_minus, 0), 1.0);
  EXPECT_EQ(update_sign(UpdateStrategy::ad_plus_minus, 1), -1.0);
}

TEST(Update, StepDirection) {
  Matrix q(1, 2);
  q << 1, 0;
  Matrix g(1, 2);
  g << 0, 1;
  const auto minus = update_projection(ProjectionMatrix(q), g, 1.0, -1.0).q();
  const auto plus = update_projection(ProjectionMatrix(q), g, 1.0, 1.0).q();
  EXPECT_NEAR(minus(0, 1), -std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(plus(0, 1), std::sqrt(0.5), 1e-12);
  EXPECT_EQ(update_projection(ProjectionMatrix(q), g, 0.0, 1.0).q(), q);
  EXPECT_THROW(update_projection(ProjectionMatrix(q), Matrix::Zero(2, 2), 1.0, 1.0), InvalidArgument);
}

namespace {

struct RegCase {
  Regularizer reg;
  char family;
  int variant;
};

const RegCase kRegs[] = {
    {Regularizer::omega0, 'o', 0}, {Regularizer::omega1, 'o', 1}, {Regularizer::omega2, 'o', 2},
    {Regularizer::omega3, 'o', 3}, {Regularizer::omega4, 'o', 4}, {Regularizer::omega5, 'o', 5},
    {Regularizer::omega6, 'o', 6}, {Regularizer::psi0, 'p', 0},   {Regularizer::psi1, 'p', 1},
    {Regularizer::psi2, 'p', 2},   {Regularizer::psi3, 'p', 3},
};

double max_rel_error(const Matrix& analytic, const Matrix& fd) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < fd.size(); ++i) {
    const double a = analytic.data()[i], b = fd.data()[i];
    if (std::abs(b) > 1e-6) worst = std::max(worst, std::abs(a - b) / std::abs(b));
    else worst = std::max(worst, std::abs(a - b));
  }
  return worst;
}

}  // namespace

TEST(Gradient, MatchesFiniteDifferencesForEveryRegularizer) {
  std::mt19937_64 gen(33);
  for (const auto& rc : kRegs) {
    const std::size_t nv = rc.family == 'p' ? 1 : 2;
    const Eigen::Index n = 7, d = 2;
    const double c = 0.3;
    std::vector<Matrix> f, q;
    std::vector<ProjectionMatrix> pq;
    for (std::size_t v = 0; v < nv; ++v) {
      f.push_back(oracle::random_matrix(gen, 4, n));
      q.push_back(oracle::random_stiefel(gen, d, 4));
      pq.emplace_back(q.back());
    }
    const Vector a = oracle::random_box_simplex(gen, n * static_cast<Eigen::Index>(nv), c);
    for (std::size_t v = 0; v < nv; ++v) {
      const Matrix g = lagrangian_gradient(v, pq, f, a, 0.7, rc.reg, c);
      const Matrix fd = oracle::subspace_fd_gradient(v, q, f, a, 0.7, rc.family, rc.variant, c);
      EXPECT_LE(max_rel_error(g, fd), 1e-6) << to_string(rc.reg) << " view " << v;
    }
  }
}

TEST(Gradient, BetaZeroIgnoresRegularizer) {
  std::mt19937_64 gen(34);
  std::vector<Matrix> f{oracle::random_matrix(gen, 3, 5), oracle::random_matrix(gen, 3, 5)};
  std::vector<ProjectionMatrix> q{ProjectionMatrix(oracle::random_stiefel(gen, 2, 3)),
                                  ProjectionMatrix(oracle::random_stiefel(gen, 2, 3))};
  const Vector a = Vector::Constant(10, 0.1);
  const Matrix base = lagrangian_gradient(0, q, f, a, 0.0, Regularizer::omega0, 1.0);
  for (auto r : {Regularizer::omega1, Regularizer::omega4, Regularizer::omega6})
    EXPECT_EQ(lagrangian_gradient(0, q, f, a, 0.0, r, 1.0), base);
}

TEST(Gradient, SingleSupportVectorCancels) {
  // All weight on one sample: the data term vanishes.
  std::mt19937_64 gen(35);
  std::vector<Matrix> f{oracle::random_matrix(gen, 3, 4)};
  std::vector<ProjectionMatrix> q{ProjectionMatrix(oracle::random_stiefel(gen, 2, 3))};
  Vector a = Vector::Zero(4);
  a(2) = 1.0;
  EXPECT_LT(lagrangian_gradient(0, q, f, a, 0.0, Regularizer::psi0, 1.0).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Gradient, AlphaLengthChecked) {
  std::vector<Matrix> f{Matrix::Ones(2, 3)};
  std::vector<ProjectionMatrix> q{ProjectionMatrix(Matrix::Identity(1, 2))};
  EXPECT_THROW(lagrangian_gradient(0, q, f, Vector::Ones(2), 0.0, Regularizer::psi0, 1.0), InvalidArgument);
}

TEST(Weights, SupportClasses) {
  Vector a(4);
  a << 0.0, 0.2, 0.4, 0.4;  // C = 0.4: one non-SV, one boundary SV, two bounded SVs
  const auto w = [&](Regularizer r) { return regularizer_weights(r, a, 0.4); };
  EXPECT_EQ(w(Regularizer::omega1), Vector::Ones(4));
  Vector sv(4);
  sv << 0, 1, 1, 1;
  EXPECT_EQ(w(Regularizer::omega5), sv);
  EXPECT_EQ(w(Regularizer::omega3), a);
  Vector boundary(4);
  boundary << 0, 0.2, 0, 0;
  EXPECT_EQ(w(Regularizer::psi2), boundary);
  EXPECT_EQ(w(Regularizer::psi3), a);
  EXPECT_EQ(w(Regularizer::psi0), Vector::Zero(4));
}

TEST(Fusion, TruthTable) {
  using L = Label;
  const L t = L::target, n = L::non_target;
  const std::array<std::array<L, 2>, 4> rows{{{t, t}, {t, n}, {n, t}, {n, n}}};
  const std::array<std::array<L, 4>, 4> expected{{
      {t, t, t, t},  // ds1..ds4 for (t, t)
      {n, t, t, n},
      {n, t, n, t},
      {n, n, n, n},
  }};
  const DecisionStrategy ds[] = {DecisionStrategy::ds1, DecisionStrategy::ds2, DecisionStrategy::ds3,
                                 DecisionStrategy::ds4};
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(fuse(rows[r], ds[k]), expected[r][k]) << r << "," << k;
  const std::array<L, 1> single{t};
  EXPECT_THROW(fuse(single, DecisionStrategy::ds4), InvalidArgument);
}

TEST(Config, Validation) {
  TrainConfig c;
  c.update_strategy = UpdateStrategy::ad_minus_plus;
  EXPECT_THROW(c.validate(3), InvalidArgument);
  EXPECT_NO_THROW(c.validate(2));
  c = TrainConfig{};
  c.regularizer = Regularizer::psi1;
  EXPECT_THROW(c.validate(2), InvalidArgument);
  c.method = Method::s_svdd;
  EXPECT_NO_THROW(c.validate(2));
  c.regularizer = Regularizer::omega1;
  EXPECT_THROW(c.validate(2), InvalidArgument);
  c = TrainConfig{};
  c.c_penalty = 0.0;
  EXPECT_THROW(c.validate(2), InvalidArgument);
  c = TrainConfig{};
  c.decision_strategy = DecisionStrategy::ds4;
  EXPECT_THROW(c.validate(1), InvalidArgument);
  c.method = Method::svdd;
  EXPECT_NO_THROW(c.validate(1));
  EXPECT_THROW(parse_update_strategy("SD"), InvalidArgument);
  EXPECT_EQ(parse_update_strategy("AD+-"), UpdateStrategy::ad_plus_minus);
}

TEST(Training, ZeroStepEqualsPcaThenSvdd) {
  std::mt19937_64 gen(36);
  const std::vector<Matrix> views{oracle::random_matrix(gen, 4, 12), oracle::random_matrix(gen, 4, 12)};
  TrainConfig cfg;
  cfg.d = 2;
  cfg.eta = 0.0;
  cfg.max_iter = 1;
  cfg.c_penalty = 0.2;
  cfg.regularizer = Regularizer::omega4;
  const auto fit = train_subspace(views, cfg);
  const std::vector<ProjectionMatrix> pca{pca_init(views[0], 2), pca_init(views[1], 2)};
  EXPECT_EQ(fit.projections[0].q(), pca[0].q());
  EXPECT_EQ(fit.projections[1].q(), pca[1].q());
  const auto ref = svdd_solve(pool_projections(pca, views), 0.2);
  EXPECT_TRUE((fit.description.alphas.array() == ref.alphas.array()).all());
  EXPECT_EQ(fit.description.radius_sq, ref.radius_sq);
}

TEST(Training, StaysOrthonormalForLargeSteps) {
  std::mt19937_64 gen(37);
  const std::vector<Matrix> views{oracle::random_matrix(gen, 5, 15), oracle::random_matrix(gen, 3, 15)};
  TrainConfig cfg;
  cfg.d = 3;
  cfg.eta = 1.0;
  cfg.beta = 10.0;
  cfg.c_penalty = 0.1;
  cfg.regularizer = Regularizer::omega6;
  cfg.update_strategy = UpdateStrategy::ad_plus_minus;
  const auto fit = train_subspace(views, cfg);
  EXPECT_LE(fit.max_orthonormality_error, 1e-10);
  EXPECT_EQ(fit.iterations_completed + (fit.stopped_early ? 1 : 0) >= 1, true);
}

TEST(Training, SingleViewPath) {
  std::mt19937_64 gen(38);
  const std::vector<Matrix> views{oracle::random_matrix(gen, 6, 20)};
  TrainConfig cfg;
  cfg.method = Method::s_svdd;
  cfg.regularizer = Regularizer::psi3;
  cfg.d = 2;
  const auto fit = train_subspace(views, cfg);
  EXPECT_EQ(fit.projections.size(), 1u);
  EXPECT_EQ(fit.description.alphas.size(), 20);
  EXPECT_EQ(fit.iterations_completed, cfg.max_iter);
}

TEST(Model, UniModalMethodsConcatenate) {
  const auto data = synth_multimodal({30, 30, {2, 3}, 5.0, 3});
  TrainConfig cfg;
  cfg.method = Method::svdd;
  cfg.c_penalty = 0.2;
  const auto m = train(data.targets_only(), cfg);
  EXPECT_EQ(m.view_count(), 1u);
  EXPECT_EQ(m.svdd->dims(), 5);
  const auto p = predict(m, data);
  EXPECT_EQ(p.per_view.size(), 1u);
  EXPECT_EQ(p.fused, p.per_view[0]);
}

TEST(Model, MultiModalPredictionChecksShape) {
  const auto data = synth_multimodal({20, 20, {3, 3}, 5.0, 4});
  TrainConfig cfg;
  cfg.c_penalty = 0.2;
  cfg.regularizer = Regularizer::omega1;
  const auto m = train(data.targets_only(), cfg);
  const auto p = predict(m, data);
  EXPECT_EQ(p.per_view.size(), 2u);
  for (std::size_t i = 0; i < data.samples(); ++i)
    EXPECT_EQ(p.fused[i], fuse(std::array<Label, 2>{p.per_view[0][i], p.per_view[1][i]}, DecisionStrategy::ds1));
  const auto wrong = synth_multimodal({5, 5, {3, 4}, 1.0, 4});
  EXPECT_THROW(predict(m, wrong), InvalidArgument);
  const auto empty = MultiModalDataset({FeatureMatrix(Matrix(0, 0)), FeatureMatrix(Matrix(0, 0))});
  EXPECT_TRUE(predict(m, empty).fused.empty());
}

TEST(Model, KernelizedNormalizedTraining) {
  const auto data = synth_multimodal({25, 25, {3, 3}, 6.0, 5});
  TrainConfig cfg;
  cfg.kernelized = true;
  cfg.kernel_params.kind = KernelKind::composite;
  cfg.kernel_params.sigma = 1.0;
  cfg.normalize = true;
  cfg.d = 3;
  cfg.c_penalty = 0.3;
  cfg.regularizer = Regularizer::omega4;
  const auto m = train(data.targets_only(), cfg);
  EXPECT_DOUBLE_EQ(m.config.kernel_params.kappa, 1.0 / 3.0);
  EXPECT_EQ(m.npt_states.size(), 2u);
  EXPECT_EQ(m.scalers.size(), 2u);
  const auto p = predict(m, data);
  std::size_t rejected = 0;
  for (std::size_t i = 25; i < 50; ++i) rejected += p.fused[i] == Label::non_target;
  EXPECT_GT(rejected, 15u);
}

TEST(Model, OcsvmScoresAreDecisionValues) {
  const auto data = synth_multimodal({30, 30, {2}, 5.0, 6});
  TrainConfig cfg;
  cfg.method = Method::ocsvm;
  cfg.nu = 0.2;
  cfg.kernelized = true;
  cfg.kernel_params.kind = KernelKind::gaussian;
  cfg.kernel_params.sigma = 1.0;
  const auto m = train(data.targets_only(), cfg);
  const auto p = predict(m, data);
  EXPECT_FALSE(p.scores_are_distances);
  for (std::size_t i = 0; i < data.samples(); ++i)
    EXPECT_EQ(p.fused[i] == Label::target, p.scores[0][i] >= 0.0);
}
