#include <gtest/gtest.h>

#include "oracles.hpp"

#include <numeric>

using namespace csisense;

namespace {

struct Blobs {
  Matrix X;
  std::vector<int> y;
};

/// Two Gaussian clouds centred at +-offset along every axis.
Blobs blobs(std::size_t per_class, std::size_t dim, double offset, double spread, std::uint64_t seed) {
  rng::Engine eng(seed);
  Blobs b{Matrix(2 * per_class, dim), std::vector<int>(2 * per_class)};
  for (std::size_t r = 0; r < 2 * per_class; ++r) {
    const int label = r < per_class ? 0 : 1;
    b.y[r] = label;
    for (std::size_t c = 0; c < dim; ++c) b.X(r, c) = (label ? offset : -offset) + spread * rng::normal(eng);
  }
  return b;
}

double accuracy(const std::vector<int> &pred, const std::vector<int> &y) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < y.size(); ++i) ok += pred[i] == y[i];
  return static_cast<double>(ok) / static_cast<double>(y.size());
}

/// Separable by some line on a coarse grid of directions and offsets.
bool grid_separable(const Matrix &X, const std::vector<int> &y) {
  for (int a = 0; a < 360; ++a) {
    const double th = a * std::numbers::pi / 180.0;
    const double w0 = std::cos(th), w1 = std::sin(th);
    for (int k = -300; k <= 300; ++k) {
      const double b = k / 100.0;
      bool ok = true;
      for (std::size_t r = 0; r < X.rows() && ok; ++r) ok = ((w0 * X(r, 0) + w1 * X(r, 1) + b) > 0) == (y[r] == 1);
      if (ok) return true;
    }
  }
  return false;
}

}  // namespace

TEST(Standardizer, SingleRow) {
  Matrix X(1, 3);
  X(0, 0) = 1;
  X(0, 1) = -2;
  X(0, 2) = 5;
  const auto s = Standardizer::fit(X);
  EXPECT_EQ(s.mean, (std::vector<double>{1, -2, 5}));
  EXPECT_EQ(s.stddev, (std::vector<double>{1, 1, 1}));
  const Matrix Z = s.apply(X);
  for (double v : Z.data()) EXPECT_EQ(v, 0.0);
}

TEST(Standardizer, TwoRows) {
  Matrix X(2, 2);
  X(0, 0) = 0;
  X(1, 0) = 2;
  X(0, 1) = 0;
  X(1, 1) = 2;
  const auto Z = Standardizer::fit(X).apply(X);
  EXPECT_DOUBLE_EQ(Z(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(Z(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(Z(1, 1), 1.0);
}

TEST(Standardizer, RandomMatrixMoments) {
  rng::Engine eng(50);
  Matrix X(50, 12);
  for (double &v : X.data()) v = rng::uniform(eng, -10.0, 40.0);
  const auto Z = Standardizer::fit(X).apply(X);
  for (std::size_t c = 0; c < 12; ++c) {
    double mu = 0.0, var = 0.0;
    for (std::size_t r = 0; r < 50; ++r) mu += Z(r, c);
    mu /= 50.0;
    for (std::size_t r = 0; r < 50; ++r) var += (Z(r, c) - mu) * (Z(r, c) - mu);
    var /= 50.0;
    EXPECT_LT(std::abs(mu), 1e-12);
    EXPECT_NEAR(var, 1.0, 1e-12);
  }
  EXPECT_THROW(Standardizer::fit(X).apply(std::vector<double>(3)), ArgumentError);
}

TEST(Svm, SeparableBlobs) {
  const auto b = blobs(30, 2, 2.0, 0.4, 1);
  const auto m = svm_train(b.X, b.y, TrainConfig{});
  EXPECT_EQ(accuracy(svm_predict(m, b.X), b.y), 1.0);
}

TEST(Svm, SymmetricPairFlipsAtOrigin) {
  Matrix X(4, 2);
  const double pts[4][2] = {{1, 0}, {-1, 0}, {1, 1}, {-1, 1}};
  for (int r = 0; r < 4; ++r) {
    X(r, 0) = pts[r][0];
    X(r, 1) = pts[r][1];
  }
  const std::vector<int> y{1, 0, 1, 0};
  const auto m = svm_train(X, y, TrainConfig{});
  EXPECT_EQ(svm_predict(m, std::vector<double>{0.1, 0.5}), 1);
  EXPECT_EQ(svm_predict(m, std::vector<double>{-0.1, 0.5}), 0);
  EXPECT_EQ(svm_predict(m, std::vector<double>{0.1, 0.0}), 1);
  EXPECT_EQ(svm_predict(m, std::vector<double>{-0.1, 1.0}), 0);
}

TEST(Svm, MatchesGridSearchSeparability) {
  rng::Engine eng(77);
  const double w0 = 0.6, w1 = -0.8, b0 = 0.3;
  Matrix X(40, 2);
  std::vector<int> y(40);
  for (std::size_t r = 0; r < 40;) {
    const double x0 = rng::uniform(eng, -2, 2), x1 = rng::uniform(eng, -2, 2);
    const double s = w0 * x0 + w1 * x1 + b0;
    if (std::abs(s) < 0.25) continue;
    X(r, 0) = x0;
    X(r, 1) = x1;
    y[r++] = s > 0 ? 1 : 0;
  }
  ASSERT_TRUE(grid_separable(X, y));
  const auto m = svm_train(X, y, TrainConfig{});
  EXPECT_EQ(accuracy(svm_predict(m, X), y), 1.0);
}

TEST(Svm, PredictRulesAndBatchConsistency) {
  SvmModel m;
  m.w = {1.0, 0.0};
  m.b = 0.0;
  m.scaler = Standardizer::identity(2);
  EXPECT_EQ(svm_predict(m, std::vector<double>{2.0, 5.0}), 1);
  EXPECT_EQ(svm_predict(m, std::vector<double>{0.0, 5.0}), 0);
  EXPECT_EQ(svm_predict(m, std::vector<double>{-1.0, 5.0}), 0);
  rng::Engine eng(2);
  Matrix X(25, 2);
  for (double &v : X.data()) v = rng::uniform(eng, -1, 1);
  const auto batch = svm_predict(m, X);
  for (std::size_t r = 0; r < 25; ++r) EXPECT_EQ(batch[r], svm_predict(m, X.row(r)));
}

TEST(Svm, PositiveRescalingKeepsLabels) {
  const auto b = blobs(20, 3, 0.5, 1.0, 4);
  auto m = svm_train(b.X, b.y, TrainConfig{});
  const auto before = svm_predict(m, b.X);
  for (auto &v : m.w) v *= 3.5;
  m.b *= 3.5;
  EXPECT_EQ(svm_predict(m, b.X), before);
}

TEST(Svm, ObjectiveDecreasesOverTraining) {
  const auto b = blobs(40, 4, 0.6, 1.0, 9);
  const auto m = svm_train(b.X, b.y, TrainConfig{});
  const auto &h = m.objective_history;
  ASSERT_EQ(h.size(), 200u);
  const double head = std::accumulate(h.begin(), h.begin() + 10, 0.0);
  const double tail = std::accumulate(h.end() - 10, h.end(), 0.0);
  EXPECT_LE(tail, head);
  EXPECT_LE(h.back(), h.front());
}

TEST(Svm, RejectsBadTrainingSets) {
  Matrix X(3, 2, 1.0);
  EXPECT_THROW(svm_train(X, std::vector<int>{1, 1, 1}, TrainConfig{}), ArgumentError);
  EXPECT_THROW(svm_train(X, std::vector<int>{0, 2, 1}, TrainConfig{}), ArgumentError);
  EXPECT_THROW(svm_train(X, std::vector<int>{0, 1}, TrainConfig{}), ArgumentError);
  X(0, 0) = std::nan("");
  EXPECT_THROW(svm_train(X, std::vector<int>{0, 1, 1}, TrainConfig{}), ArgumentError);
}

TEST(Nn, ParameterCountsPerLayer) {
  const auto net = Network::glorot(12, 1);
  const std::vector<std::size_t> expected{832, 2080, 528, 136, 18};
  ASSERT_EQ(net.layers().size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_EQ(net.layers()[i].param_count(), expected[i]);
  EXPECT_EQ(net.param_count(), 3594u);
}

TEST(Nn, ZeroWeightsGiveUniformOutput) {
  auto m = nn_init(12, 3);
  auto p = m.net.parameters();
  std::fill(p.begin(), p.end(), 0.0);
  m.net.set_parameters(p);
  rng::Engine eng(6);
  for (int t = 0; t < 5; ++t) {
    std::vector<double> x(12);
    for (auto &v : x) v = rng::normal(eng) * 10.0;
    const auto out = nn_forward(m, x);
    EXPECT_DOUBLE_EQ(out[0], 0.5);
    EXPECT_DOUBLE_EQ(out[1], 0.5);
    EXPECT_EQ(nn_predict(m, x), 0);
  }
}

TEST(Nn, ProbabilitiesAreNormalized) {
  const auto m = nn_init(12, 8);
  rng::Engine eng(7);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> x(12);
    for (auto &v : x) v = rng::normal(eng) * 5.0;
    const auto p = nn_forward(m, x);
    EXPECT_GE(p[0], 0.0);
    EXPECT_GE(p[1], 0.0);
    EXPECT_NEAR(p[0] + p[1], 1.0, 1e-12);
  }
}

TEST(Nn, GradientMatchesFiniteDifferences) {
  rng::Engine eng(42);
  Matrix X(4, 12);
  for (double &v : X.data()) v = rng::normal(eng);
  const std::vector<int> y{0, 1, 1, 0};
  const auto r = oracle::check_gradient(Network::glorot(12, 42), X, y, 1e-5, 1e-6);
  EXPECT_EQ(r.params, 3594u);
  EXPECT_LT(r.max_rel_error, 1e-4);
}

TEST(Nn, EluIsContinuousAndSmoothAtZero) {
  EXPECT_EQ(elu(0.0), 0.0);
  const double h = 1e-7;
  const double left = (elu(0.0) - elu(-h)) / h;
  const double right = (elu(h) - elu(0.0)) / h;
  EXPECT_NEAR(left, right, 1e-6);
  EXPECT_DOUBLE_EQ(elu_derivative(0.0), 1.0);
}

TEST(Nn, LearnsXor) {
  Matrix X(4, 2);
  const double pts[4][2] = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  for (int r = 0; r < 4; ++r) {
    X(r, 0) = pts[r][0];
    X(r, 1) = pts[r][1];
  }
  const std::vector<int> y{0, 1, 1, 0};
  TrainConfig cfg;
  cfg.epochs = 2000;
  cfg.batch_size = 4;
  cfg.seed = 1;
  const auto m = nn_train(nn_init(2, 1), X, y, cfg);
  EXPECT_EQ(nn_predict(m, X), y);
}

TEST(Nn, OneAdamStepLowersBatchLoss) {
  int lowered = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto b = blobs(4, 12, 0.5, 1.0, seed + 500);
    const Matrix Z = Standardizer::fit(b.X).apply(b.X);
    std::vector<std::size_t> rows(8);
    std::iota(rows.begin(), rows.end(), 0);
    const auto init = nn_init(12, seed);
    auto g = init.net.make_gradient();
    const double before = init.net.loss_and_gradient(Z, b.y, rows, g);
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.batch_size = 8;
    cfg.seed = seed;
    const auto trained = nn_train(init, b.X, b.y, cfg);
    const double after = trained.net.loss_and_gradient(Z, b.y, rows, g);
    if (after < before) ++lowered;
  }
  EXPECT_GE(lowered, 95);
}

TEST(Nn, TrainingIsDeterministic) {
  const auto b = blobs(10, 12, 0.7, 1.0, 3);
  TrainConfig cfg;
  cfg.epochs = 20;
  cfg.seed = 11;
  const auto a = nn_train(nn_init(12, 11), b.X, b.y, cfg);
  const auto c = nn_train(nn_init(12, 11), b.X, b.y, cfg);
  EXPECT_EQ(a.net.parameters(), c.net.parameters());
}

TEST(Nn, RejectsWrongInputWidth) {
  const auto b = blobs(5, 4, 1.0, 1.0, 3);
  EXPECT_THROW(nn_train(nn_init(12, 1), b.X, b.y, TrainConfig{}), ArgumentError);
}

TEST(ModelJson, RoundTripPreservesPredictions) {
  const auto b = blobs(15, 12, 0.4, 1.0, 21);
  TrainConfig cfg;
  cfg.epochs = 30;
  for (auto kind : {ModelKind::Svm, ModelKind::Nn}) {
    const auto m = train_model(kind, b.X, b.y, cfg);
    const auto j = model_to_json(m);
    const auto back = model_from_json(nlohmann::json::parse(j.dump()));
    EXPECT_EQ(kind_of(back), kind);
    EXPECT_EQ(predict(back, b.X), predict(m, b.X));
    EXPECT_EQ(model_to_json(back), j);
  }
}

TEST(ModelJson, RejectsMalformed) {
  EXPECT_THROW(model_from_json(nlohmann::json{{"kind", "tree"}}), FormatError);
  EXPECT_THROW(model_from_json(nlohmann::json{{"kind", "svm"}}), FormatError);
}
