// SPDX-License-Identifier: Apache-2.0
//
// Evaluation metrics (MAE, Pearson, Bland-Altman), k-fold splitting and the
// cross-validation protocol that produces one report row per method.

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dmqca/sample.hpp"
#include "dmqca/train.hpp"

namespace dmqca {

struct MaeResult {
  IndexVector per_index{};
  double overall = 0.0;
};

MaeResult mae(std::span<const IndexVector> predictions, std::span<const IndexVector> labels);

/// Sample Pearson r. Throws UndefinedCorrelationError when either side has
/// zero variance, ArgumentError for fewer than two pairs.
double pearson(std::span<const double> x, std::span<const double> y);

struct BlandAltman {
  double mean_diff = 0.0;
  double sd_diff = 0.0;  // sample sd (N - 1)
  double loa_low = 0.0;
  double loa_high = 0.0;
  /// (mean of pair, prediction - label) for plotting.
  std::vector<std::pair<double, double>> pairs;
};

BlandAltman bland_altman(std::span<const double> predictions, std::span<const double> labels);

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Shuffled partition into k folds whose sizes differ by at most one.
std::vector<Fold> kfold(std::size_t n_samples, std::size_t k, std::uint64_t seed);

class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual IndexVector predict(const Sample& sample) const = 0;
};

class Learner {
 public:
  virtual ~Learner() = default;
  virtual std::string name() const = 0;
  virtual std::unique_ptr<Predictor> fit(std::span<const Sample* const> train) = 0;
};

/// Predicts the per-index mean of its training labels.
class MeanLearner : public Learner {
 public:
  std::string name() const override { return "Mean"; }
  std::unique_ptr<Predictor> fit(std::span<const Sample* const> train) override;
};

/// Returns each sample's own label; a plumbing check for the harness.
class OracleLearner : public Learner {
 public:
  std::string name() const override { return "Oracle"; }
  std::unique_ptr<Predictor> fit(std::span<const Sample* const> train) override;
};

class ModelPredictor : public Predictor {
 public:
  ModelPredictor(DmqcaParams params, ModelConfig model, AblationConfig ablation)
      : params_(std::move(params)), model_(std::move(model)), ablation_(ablation) {}
  IndexVector predict(const Sample& sample) const override;
  const DmqcaParams& params() const { return params_; }

 private:
  DmqcaParams params_;
  ModelConfig model_;
  AblationConfig ablation_;
};

class ModelLearner : public Learner {
 public:
  ModelLearner(std::string name, ModelConfig model, AblationConfig ablation, TrainConfig train)
      : name_(std::move(name)), model_(std::move(model)), ablation_(ablation), train_(train) {}
  std::string name() const override { return name_; }
  std::unique_ptr<Predictor> fit(std::span<const Sample* const> train) override;
  const std::vector<std::vector<EpochRecord>>& logs() const { return logs_; }

 private:
  std::string name_;
  ModelConfig model_;
  AblationConfig ablation_;
  TrainConfig train_;
  std::vector<std::vector<EpochRecord>> logs_;
};

struct FoldOutcome {
  std::size_t fold = 0;
  bool failed = false;
  std::string error;
  std::vector<std::size_t> test_ids;
  std::vector<IndexVector> predictions;
  std::vector<IndexVector> labels;
  double mae = 0.0;
  /// Per-index Pearson r; nullopt where undefined (zero variance).
  std::array<std::optional<double>, kNumIndices> pearson{};
};

struct EvalReport {
  std::string method;
  std::size_t folds = 0;
  std::size_t failed_folds = 0;
  std::size_t samples = 0;
  IndexVector index_mae{};
  double mae = 0.0;
  /// sd of per-sample MAE (each sample averaged over the six indices).
  double mae_sd_samples = 0.0;
  /// sd of per-fold MAE.
  double mae_sd_folds = 0.0;
  /// Pearson r in percent: mean and sd over every defined (fold, index) pair.
  bool pearson_defined = false;
  double pearson_mean = 0.0;
  double pearson_sd = 0.0;
  std::size_t pearson_undefined = 0;
  /// Pearson r in percent per index over the pooled held-out predictions.
  std::array<std::optional<double>, kNumIndices> pooled_pearson{};
  std::array<BlandAltman, kNumIndices> bland_altman{};
  std::vector<FoldOutcome> fold_outcomes;
};

/// Builds a report from per-fold outcomes (failed folds are excluded from
/// the aggregates but counted).
EvalReport summarize(const std::string& method, std::vector<FoldOutcome> outcomes);

/// Trains `learner` on each fold's training ids and scores its held-out ids.
/// The learner only ever receives training samples; every id it is handed is
/// audited against the fold before fitting.
EvalReport run_protocol(std::span<const Sample> dataset, Learner& learner,
                        const std::vector<Fold>& folds);
EvalReport run_protocol(std::span<const Sample> dataset, Learner& learner, std::size_t k,
                        std::uint64_t seed);

/// Scores a fixed predictor on every sample as a single fold.
EvalReport evaluate_predictor(const std::string& method, std::span<const Sample> dataset,
                              const Predictor& predictor);

}  // namespace dmqca
