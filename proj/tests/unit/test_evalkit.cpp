// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "dmqca/errors.hpp"
#include "dmqca/evalkit.hpp"

using namespace dmqca;

namespace {

std::vector<Sample> labelled(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Sample> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].id = "s" + std::to_string(i);
    out[i].label = Tensor::uniform({6}, 1, 5, rng);
  }
  return out;
}

class ShiftPredictor : public Predictor {
 public:
  explicit ShiftPredictor(double d) : d_(d) {}
  IndexVector predict(const Sample& s) const override {
    IndexVector out = s.label_array();
    for (double& v : out) v += d_;
    return out;
  }

 private:
  double d_;
};

}  // namespace

TEST(Mae, Examples) {
  const std::vector<IndexVector> labels{{1, 2, 3, 4, 5, 6}, {2, 3, 4, 5, 6, 7}};
  EXPECT_EQ(mae(labels, labels).overall, 0.0);
  std::vector<IndexVector> preds = labels;
  preds[0][3] += 1.0;
  preds[1][3] -= 3.0;
  const MaeResult r = mae(preds, labels);
  EXPECT_DOUBLE_EQ(r.per_index[3], 2.0);
  EXPECT_EQ(r.per_index[0], 0.0);
  EXPECT_DOUBLE_EQ(r.overall, 4.0 / 12.0);
  preds.pop_back();
  EXPECT_THROW(mae(preds, labels), DimensionError);
}

TEST(Pearson, Examples) {
  const std::vector<double> a{1, 2, 3}, b{2, 4, 6}, c{5, 4, 3}, flat{2, 2, 2};
  EXPECT_NEAR(pearson(a, a), 1.0, 1e-15);
  EXPECT_NEAR(pearson(a, b), 1.0, 1e-15);
  EXPECT_NEAR(pearson(a, c), -1.0, 1e-15);
  EXPECT_THROW(pearson(a, flat), UndefinedCorrelationError);
  EXPECT_THROW(pearson(std::vector<double>{1}, std::vector<double>{1}), ArgumentError);
}

TEST(Pearson, BoundedAndAffineInvariant) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> x(8), y(8), z(8);
    for (std::size_t i = 0; i < 8; ++i) {
      x[i] = u(rng);
      y[i] = u(rng);
      z[i] = 2.5 * y[i] - 7.0;
    }
    const double r = pearson(x, y);
    EXPECT_LE(std::abs(r), 1.0 + 1e-12);
    EXPECT_NEAR(pearson(x, z), r, 1e-12);
  }
}

TEST(BlandAltman, Examples) {
  const std::vector<double> l{3, 5};
  const BlandAltman same = bland_altman(l, l);
  EXPECT_EQ(same.mean_diff, 0.0);
  EXPECT_EQ(same.loa_low, 0.0);
  EXPECT_EQ(same.loa_high, 0.0);
  const BlandAltman ba = bland_altman(std::vector<double>{4, 4}, l);
  EXPECT_EQ(ba.mean_diff, 0.0);
  EXPECT_NEAR(ba.sd_diff, std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(ba.loa_high, 1.96 * std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(ba.loa_low, -1.96 * std::sqrt(2.0), 1e-14);
  ASSERT_EQ(ba.pairs.size(), 2u);
  EXPECT_EQ(ba.pairs[0], (std::pair<double, double>{3.5, 1.0}));
}

TEST(BlandAltman, ConstantShiftMovesMeanOnly) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 5);
  std::vector<double> p(20), l(20), q(20);
  for (std::size_t i = 0; i < 20; ++i) {
    p[i] = u(rng);
    l[i] = u(rng);
    q[i] = p[i] + 0.75;
  }
  const BlandAltman a = bland_altman(p, l), b = bland_altman(q, l);
  EXPECT_NEAR(b.mean_diff, a.mean_diff + 0.75, 1e-12);
  EXPECT_NEAR(b.sd_diff, a.sd_diff, 1e-12);
  EXPECT_NEAR(b.loa_high - b.loa_low, a.loa_high - a.loa_low, 1e-12);
}

TEST(Kfold, PartitionProperties) {
  const auto folds = kfold(100, 10, 3);
  ASSERT_EQ(folds.size(), 10u);
  std::multiset<std::size_t> seen;
  for (const auto& f : folds) {
    EXPECT_EQ(f.test.size(), 10u);
    EXPECT_EQ(f.train.size(), 90u);
    std::set<std::size_t> train(f.train.begin(), f.train.end());
    for (std::size_t id : f.test) EXPECT_EQ(train.count(id), 0u);
    seen.insert(f.test.begin(), f.test.end());
  }
  EXPECT_EQ(seen.size(), 100u);
  for (std::size_t i = 0; i < 100; ++i) EXPECT_EQ(seen.count(i), 1u);
  const auto again = kfold(100, 10, 3);
  for (std::size_t k = 0; k < 10; ++k) EXPECT_EQ(again[k].test, folds[k].test);
  EXPECT_NE(kfold(100, 10, 4)[0].test, folds[0].test);
}

TEST(Kfold, UnevenSizesAndErrors) {
  const auto folds = kfold(23, 5, 1);
  std::size_t lo = 100, hi = 0;
  for (const auto& f : folds) {
    lo = std::min(lo, f.test.size());
    hi = std::max(hi, f.test.size());
  }
  EXPECT_LE(hi - lo, 1u);
  EXPECT_THROW(kfold(4, 5, 1), ArgumentError);
  EXPECT_THROW(kfold(10, 1, 1), ArgumentError);
}

TEST(Protocol, OracleScoresPerfectly) {
  const auto data = labelled(30, 4);
  OracleLearner oracle;
  const EvalReport r = run_protocol(data, oracle, 5, 1);
  EXPECT_EQ(r.mae, 0.0);
  EXPECT_TRUE(r.pearson_defined);
  EXPECT_NEAR(r.pearson_mean, 100.0, 1e-9);
  EXPECT_EQ(r.samples, 30u);
  EXPECT_EQ(r.folds, 5u);
}

TEST(Protocol, MeanPredictorClosedForm) {
  const auto data = labelled(30, 5);
  const auto folds = kfold(30, 5, 2);
  MeanLearner mean;
  const EvalReport r = run_protocol(data, mean, folds);
  EXPECT_FALSE(r.pearson_defined);
  EXPECT_EQ(r.pearson_undefined, 5u * 6u);

  double total = 0.0;
  for (const auto& f : folds) {
    IndexVector m{};
    for (std::size_t id : f.train)
      for (std::size_t k = 0; k < 6; ++k) m[k] += data[id].label[k] / static_cast<double>(f.train.size());
    for (std::size_t id : f.test)
      for (std::size_t k = 0; k < 6; ++k) total += std::abs(data[id].label[k] - m[k]);
  }
  EXPECT_NEAR(r.mae, total / (30.0 * 6.0), 1e-12);
}

TEST(Protocol, FixedPredictorMaeIsShift) {
  const auto data = labelled(12, 6);
  const EvalReport r = evaluate_predictor("Shift", data, ShiftPredictor(0.5));
  EXPECT_NEAR(r.mae, 0.5, 1e-12);
  for (const auto& ba : r.bland_altman) EXPECT_NEAR(ba.mean_diff, 0.5, 1e-12);
}

TEST(Protocol, Deterministic) {
  const auto data = labelled(20, 7);
  MeanLearner a, b;
  const EvalReport ra = run_protocol(data, a, 4, 9), rb = run_protocol(data, b, 4, 9);
  EXPECT_EQ(ra.mae, rb.mae);
  EXPECT_EQ(ra.index_mae, rb.index_mae);
  for (std::size_t f = 0; f < 4; ++f) EXPECT_EQ(ra.fold_outcomes[f].test_ids, rb.fold_outcomes[f].test_ids);
}

TEST(Protocol, LearnerSeesOnlyTrainingIds) {
  class Spy : public Learner {
   public:
    std::string name() const override { return "Spy"; }
    std::unique_ptr<Predictor> fit(std::span<const Sample* const> train) override {
      seen.emplace_back();
      for (const Sample* s : train) seen.back().insert(s->id);
      return MeanLearner().fit(train);
    }
    std::vector<std::set<std::string>> seen;
  } spy;
  const auto data = labelled(15, 8);
  const auto folds = kfold(15, 3, 1);
  run_protocol(data, spy, folds);
  ASSERT_EQ(spy.seen.size(), 3u);
  for (std::size_t f = 0; f < 3; ++f) {
    EXPECT_EQ(spy.seen[f].size(), folds[f].train.size());
    for (std::size_t id : folds[f].test) EXPECT_EQ(spy.seen[f].count(data[id].id), 0u);
  }
}

TEST(Protocol, FailedFoldIsReported) {
  class Diverging : public Learner {
   public:
    std::string name() const override { return "Bad"; }
    std::unique_ptr<Predictor> fit(std::span<const Sample* const> train) override {
      if (++calls == 2) throw TrainingError("training diverged", 7);
      return MeanLearner().fit(train);
    }
    int calls = 0;
  } bad;
  const auto data = labelled(15, 9);
  const EvalReport r = run_protocol(data, bad, 3, 1);
  EXPECT_EQ(r.failed_folds, 1u);
  EXPECT_TRUE(r.fold_outcomes[1].failed);
  EXPECT_NE(r.fold_outcomes[1].error.find("step 7"), std::string::npos);
  EXPECT_EQ(r.samples, 10u);
}
