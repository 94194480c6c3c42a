#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "cwfd/attacker.hpp"
#include "cwfd/injector.hpp"
#include "cwfd/synth.hpp"
#include "gen.hpp"
#include "oracles.hpp"

namespace cwfd {
namespace {

TEST(Tam, DirectBinning) {
  const Trace x({{0.0, kOutgoing}, {0.0, kIncoming}});
  const auto f = extract_tam(x, {2, 1.0});
  EXPECT_EQ(f.values, (Eigen::VectorXd(4) << 1, 0, 1, 0).finished());
}

TEST(Tam, OutgoingOnlyLeavesIncomingRowEmpty) {
  const Trace x({{0.0, kOutgoing}, {0.7, kOutgoing}, {3.0, kOutgoing}});
  const auto f = extract_tam(x, {4, 2.0});
  for (std::size_t s = 0; s < 4; ++s) EXPECT_EQ(f.incoming(s), 0.0);
  EXPECT_EQ(f.outgoing(0), 1.0);
  EXPECT_EQ(f.outgoing(1), 1.0);
  EXPECT_EQ(f.outgoing(3), 1.0);  // past max_time clamps to the last slot
}

TEST(Tam, MatchesSlotFormula) {
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const auto x = testing::random_trace(rng, 1 + rng.index(200));
    const TamConfig cfg{1 + rng.index(20), rng.uniform(0.1, 3.0)};
    const auto f = extract_tam(x, cfg);
    Eigen::VectorXd expect = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cfg.dimension()));
    for (const auto& e : x.events()) {
      const auto slot = std::min<std::size_t>(
          static_cast<std::size_t>(std::floor(e.timestamp * static_cast<double>(cfg.slots) / cfg.max_time)),
          cfg.slots - 1);
      expect[static_cast<Eigen::Index>((e.direction == kOutgoing ? 0 : cfg.slots) + slot)] += 1;
    }
    EXPECT_EQ(f.values, expect);
    EXPECT_EQ(f.values.sum(), static_cast<double>(x.size()));
    EXPECT_GE(f.values.minCoeff(), 0.0);
  }
}

TEST(Tam, InjectionRaisesIncomingByBudget) {
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const auto x = testing::random_trace(rng, 1 + rng.index(100));
    const auto plan = testing::random_plan(rng, x.size(), 1 + rng.index(5), 50);
    const TamConfig cfg{16, 2.0};
    const auto before = extract_tam(x, cfg), after = extract_tam(inject(x, plan), cfg);
    EXPECT_EQ(after.values.tail(16).sum() - before.values.tail(16).sum(), static_cast<double>(plan.total()));
    EXPECT_EQ(after.values.head(16), before.values.head(16));
  }
}

TEST(Tam, InvalidConfigThrows) {
  EXPECT_THROW(extract_tam(Trace(), {0, 1.0}), std::invalid_argument);
  EXPECT_THROW(extract_tam(Trace(), {4, 0.0}), std::invalid_argument);
}

TEST(Classifier, GradientMatchesFiniteDifferences) {
  Rng rng(3);
  for (int i = 0; i < 60; ++i) {
    const int classes = 2 + static_cast<int>(rng.index(4));
    const int dim = 1 + static_cast<int>(rng.index(6));
    const int n = 1 + static_cast<int>(rng.index(10));
    auto m = testing::random_softmax(rng, classes, dim, rng.uniform(0.0, 0.1));
    Eigen::MatrixXd z(n, dim);
    for (Eigen::Index k = 0; k < z.size(); ++k) z.data()[k] = rng.normal();
    std::vector<int> y(n);
    for (auto& v : y) v = static_cast<int>(rng.index(classes));

    EXPECT_LE(testing::softmax_gradient_error(m, z, y), 1e-5) << i;
  }
}

TEST(Classifier, ZeroLearningRateGivesLogC) {
  Rng rng(4);
  Eigen::MatrixXd f(20, 3);
  for (Eigen::Index k = 0; k < f.size(); ++k) f.data()[k] = rng.uniform();
  std::vector<int> y(20);
  for (int i = 0; i < 20; ++i) y[i] = i % 4;
  const auto r = train_classifier(f, y, 4, {0.0, 100, 1e-3});
  EXPECT_TRUE(r.model.weights.isZero(0));
  EXPECT_TRUE(r.model.bias.isZero(0));
  EXPECT_NEAR(r.final_loss, std::log(4.0), 1e-12);
}

TEST(Classifier, SeparableSetReachesFullAccuracy) {
  Rng rng(5);
  Eigen::MatrixXd f(100, 2);
  std::vector<int> y(100);
  for (int i = 0; i < 100; ++i) {
    y[i] = i % 2;
    f(i, 0) = (y[i] ? 2.0 : -2.0) + rng.uniform(-1.0, 1.0);
    f(i, 1) = rng.uniform(-3.0, 3.0);
  }
  const auto r = train_classifier(f, y, 2, {0.5, 500, 1e-4});
  const auto preds = predict_all(r.model, f);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(preds[i].label, y[i]);
}

TEST(Classifier, RejectsSingleClass) {
  Eigen::MatrixXd f = Eigen::MatrixXd::Ones(3, 2);
  const std::vector<int> y{1, 1, 1};
  EXPECT_THROW(train_classifier(f, y, 2), std::invalid_argument);
  const std::vector<int> bad{0, 1, 5};
  EXPECT_THROW(train_classifier(f, bad, 2), std::invalid_argument);
}

TEST(Classifier, StandardizationStatistics) {
  Eigen::MatrixXd f(4, 2);
  f << 1, 5, 3, 5, 5, 5, 7, 5;
  const std::vector<int> y{0, 1, 0, 1};
  const auto m = train_classifier(f, y, 2, {0.1, 1, 0}).model;
  EXPECT_DOUBLE_EQ(m.feature_mean[0], 4.0);
  EXPECT_DOUBLE_EQ(m.feature_scale[0], std::sqrt(5.0));
  EXPECT_DOUBLE_EQ(m.feature_scale[1], 1.0);  // constant column
}

TEST(Predict, ZeroWeightsUniform) {
  SoftmaxModel m;
  m.weights = Eigen::MatrixXd::Zero(5, 3);
  m.bias = Eigen::VectorXd::Zero(5);
  m.feature_mean = Eigen::VectorXd::Zero(3);
  m.feature_scale = Eigen::VectorXd::Ones(3);
  const auto p = predict(m, Eigen::VectorXd::Ones(3));
  EXPECT_EQ(p.label, 0);
  for (auto v : p.probabilities) EXPECT_DOUBLE_EQ(v, 0.2);
  EXPECT_THROW(predict(m, Eigen::VectorXd::Ones(4)), std::invalid_argument);
}

TEST(Predict, ProbabilitiesAndMonotonicity) {
  Rng rng(6);
  for (int i = 0; i < 100; ++i) {
    auto m = testing::random_softmax(rng, 6, 4, 0);
    Eigen::VectorXd x(4);
    for (auto& v : x) v = rng.normal() * 10;
    const auto p = predict(m, x);
    EXPECT_NEAR(p.probabilities.sum(), 1.0, 1e-9);
    EXPECT_GE(p.probabilities.minCoeff(), 0.0);
    const int c = static_cast<int>(rng.index(6));
    m.bias[c] += 0.5;
    EXPECT_GT(predict(m, x).probabilities[c], p.probabilities[c]);
  }
}

TEST(Classifier, CheckpointRoundTrip) {
  Rng rng(7);
  auto m = testing::random_softmax(rng, 3, 5, 0);
  for (auto& v : m.feature_mean) v = rng.normal();
  const auto path = std::filesystem::temp_directory_path() / "cwfd_softmax.bin";
  m.save(path);
  EXPECT_TRUE(SoftmaxModel::load(path) == m);
  write_file_atomic(path, "CWFDSMAX");
  EXPECT_THROW(SoftmaxModel::load(path), std::runtime_error);
  std::filesystem::remove(path);
}

TEST(Classifier, TrainingIsDeterministic) {
  SynthConfig s;
  s.classes = 3;
  s.per_class = 10;
  const auto ds = make_synthetic_corpus(s);
  const auto f = extract_tam_matrix(ds, {});
  EXPECT_TRUE(train_classifier(f, ds.labels(), 3).model == train_classifier(f, ds.labels(), 3).model);
  EXPECT_EQ(f, extract_tam_matrix(ds, {}, 4));
}

TEST(FeatureShift, Properties) {
  Rng rng(8);
  const TamConfig tam;
  for (int i = 0; i < 50; ++i) {
    const auto x = testing::random_trace(rng, 50 + rng.index(200));
    EXPECT_EQ(feature_shift(tam, x, x), 0.0);
    const std::size_t k = rng.index(x.size() + 1);
    EXPECT_LE(feature_shift(tam, x, inject(x, TriggerPlan({k}, {1}))), 1.0);
    double last = 0.0;
    for (std::size_t d : {0u, 10u, 100u, 1000u}) {
      const double s = feature_shift(tam, x, inject(x, TriggerPlan({k}, {d})));
      EXPECT_GE(s, last);
      last = s;
    }
  }
}

TEST(GradientSimilarity, Properties) {
  SynthConfig s;
  s.classes = 4;
  s.per_class = 30;
  const auto ds = make_synthetic_corpus(s);
  const TamConfig tam;
  const auto model = train_classifier(extract_tam_matrix(ds, tam), ds.labels(), 4).model;
  Rng rng(9);
  int tiny_wins = 0, compared = 0;
  for (int i = 0; i < 50; ++i) {
    const auto& e = ds.entries[rng.index(ds.size())];
    const auto same = gradient_similarity(model, tam, e.trace, e.trace, e.label);
    EXPECT_NEAR(same.cosine, 1.0, 1e-12);
    const std::size_t k = rng.index(e.trace.size());
    const auto tiny = gradient_similarity(model, tam, e.trace, inject(e.trace, TriggerPlan({k}, {1})), e.label);
    const auto big = gradient_similarity(model, tam, e.trace, inject(e.trace, TriggerPlan({k}, {5000})), e.label);
    for (double c : {tiny.cosine, big.cosine}) {
      EXPECT_GE(c, -1.0);
      EXPECT_LE(c, 1.0);
    }
    if (tiny.degenerate || big.degenerate) continue;  // saturated softmax, cosine undefined
    ++compared;
    tiny_wins += tiny.cosine > big.cosine;
  }
  EXPECT_GE(compared, 40);
  EXPECT_EQ(tiny_wins, compared);
  EXPECT_THROW(gradient_similarity(model, tam, ds.entries[0].trace, ds.entries[0].trace, 9), std::invalid_argument);
}

TEST(FeaturesCsv, Layout) {
  Eigen::MatrixXd f(2, 2);
  f << 1, 2.5, 0, 3;
  const std::vector<int> y{4, 1};
  EXPECT_EQ(features_csv(f, y), "label,f0,f1\n4,1,2.5\n1,0,3\n");
}

}  // namespace
}  // namespace cwfd
