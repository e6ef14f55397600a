// SPDX-License-Identifier: Apache-2.0
#include "dmqca/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_set>

#include "dmqca/errors.hpp"

namespace dmqca {
namespace {

double sample_sd(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double mean_of(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

std::vector<double> column(std::span<const IndexVector> rows, std::size_t k) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[k]);
  return out;
}

class MeanPredictor : public Predictor {
 public:
  explicit MeanPredictor(IndexVector mean) : mean_(mean) {}
  IndexVector predict(const Sample&) const override { return mean_; }

 private:
  IndexVector mean_;
};

class LabelPredictor : public Predictor {
 public:
  IndexVector predict(const Sample& sample) const override { return sample.label_array(); }
};

}  // namespace

MaeResult mae(std::span<const IndexVector> predictions, std::span<const IndexVector> labels) {
  if (predictions.size() != labels.size()) {
    throw DimensionError("mae: " + std::to_string(predictions.size()) + " predictions vs " +
                         std::to_string(labels.size()) + " labels");
  }
  if (predictions.empty()) throw ArgumentError("mae: need at least one sample");
  MaeResult out;
  const double n = static_cast<double>(predictions.size());
  double total = 0.0;
  for (std::size_t k = 0; k < kNumIndices; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
      s += std::abs(predictions[i][k] - labels[i][k]);
    }
    out.per_index[k] = s / n;
    total += s;
  }
  out.overall = total / (n * static_cast<double>(kNumIndices));
  return out;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw DimensionError("pearson: lengths " + std::to_string(x.size()) + " and " +
                         std::to_string(y.size()));
  }
  if (x.size() < 2) throw ArgumentError("pearson: need at least two pairs");
  const auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double e) { return e == v[0]; });
  };
  if (constant(x) || constant(y)) throw UndefinedCorrelationError("pearson: zero variance");
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) {
    throw UndefinedCorrelationError("pearson: zero variance");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

BlandAltman bland_altman(std::span<const double> predictions, std::span<const double> labels) {
  if (predictions.size() != labels.size()) {
    throw DimensionError("bland_altman: lengths " + std::to_string(predictions.size()) + " and " +
                         std::to_string(labels.size()));
  }
  if (predictions.size() < 2) throw ArgumentError("bland_altman: need at least two pairs");
  BlandAltman out;
  std::vector<double> diffs(predictions.size());
  out.pairs.reserve(predictions.size());
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    diffs[i] = predictions[i] - labels[i];
    out.pairs.emplace_back(0.5 * (predictions[i] + labels[i]), diffs[i]);
  }
  out.mean_diff = mean_of(diffs);
  out.sd_diff = sample_sd(diffs);
  out.loa_low = out.mean_diff - 1.96 * out.sd_diff;
  out.loa_high = out.mean_diff + 1.96 * out.sd_diff;
  return out;
}

std::vector<Fold> kfold(std::size_t n_samples, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ArgumentError("kfold: k must be at least 2, got " + std::to_string(k));
  if (n_samples < k) {
    throw ArgumentError("kfold: " + std::to_string(n_samples) + " samples for " +
                        std::to_string(k) + " folds");
  }
  std::vector<std::size_t> order(n_samples);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = n_samples - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
    std::swap(order[i], order[j]);
  }
  std::vector<Fold> folds(k);
  const std::size_t base = n_samples / k;
  const std::size_t extra = n_samples % k;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t len = base + (f < extra ? 1 : 0);
    folds[f].test.assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                         order.begin() + static_cast<std::ptrdiff_t>(pos + len));
    std::sort(folds[f].test.begin(), folds[f].test.end());
    pos += len;
  }
  for (std::size_t f = 0; f < k; ++f) {
    for (std::size_t g = 0; g < k; ++g) {
      if (g == f) continue;
      folds[f].train.insert(folds[f].train.end(), folds[g].test.begin(), folds[g].test.end());
    }
    std::sort(folds[f].train.begin(), folds[f].train.end());
  }
  return folds;
}

std::unique_ptr<Predictor> MeanLearner::fit(std::span<const Sample* const> train) {
  if (train.empty()) throw ArgumentError("MeanLearner: empty training set");
  IndexVector mean{};
  for (const Sample* s : train) {
    const IndexVector l = s->label_array();
    for (std::size_t k = 0; k < kNumIndices; ++k) mean[k] += l[k];
  }
  for (double& m : mean) m /= static_cast<double>(train.size());
  return std::make_unique<MeanPredictor>(mean);
}

std::unique_ptr<Predictor> OracleLearner::fit(std::span<const Sample* const>) {
  return std::make_unique<LabelPredictor>();
}

IndexVector ModelPredictor::predict(const Sample& sample) const {
  return dmqca::predict(sample, params_, model_, ablation_);
}

std::unique_ptr<Predictor> ModelLearner::fit(std::span<const Sample* const> train) {
  TrainResult result = train_model(train, model_, ablation_, train_);
  logs_.push_back(std::move(result.epochs));
  return std::make_unique<ModelPredictor>(std::move(result.params), model_, ablation_);
}

EvalReport summarize(const std::string& method, std::vector<FoldOutcome> outcomes) {
  EvalReport report;
  report.method = method;
  report.folds = outcomes.size();

  std::vector<IndexVector> all_pred;
  std::vector<IndexVector> all_label;
  std::vector<double> fold_mae;
  std::vector<double> r_percent;
  for (auto& o : outcomes) {
    if (o.failed) {
      ++report.failed_folds;
      continue;
    }
    all_pred.insert(all_pred.end(), o.predictions.begin(), o.predictions.end());
    all_label.insert(all_label.end(), o.labels.begin(), o.labels.end());
    fold_mae.push_back(o.mae);
    for (const auto& r : o.pearson) {
      if (r) {
        r_percent.push_back(100.0 * *r);
      } else {
        ++report.pearson_undefined;
      }
    }
  }
  report.samples = all_pred.size();
  if (!all_pred.empty()) {
    const MaeResult m = mae(all_pred, all_label);
    report.index_mae = m.per_index;
    report.mae = m.overall;
    std::vector<double> per_sample(all_pred.size());
    for (std::size_t i = 0; i < all_pred.size(); ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < kNumIndices; ++k) s += std::abs(all_pred[i][k] - all_label[i][k]);
      per_sample[i] = s / static_cast<double>(kNumIndices);
    }
    report.mae_sd_samples = sample_sd(per_sample);
    report.mae_sd_folds = sample_sd(fold_mae);
  }
  if (!r_percent.empty()) {
    report.pearson_defined = true;
    report.pearson_mean = mean_of(r_percent);
    report.pearson_sd = sample_sd(r_percent);
  }
  if (all_pred.size() >= 2) {
    for (std::size_t k = 0; k < kNumIndices; ++k) {
      const auto p = column(all_pred, k);
      const auto l = column(all_label, k);
      report.bland_altman[k] = bland_altman(p, l);
      try {
        report.pooled_pearson[k] = 100.0 * pearson(p, l);
      } catch (const UndefinedCorrelationError&) {
        report.pooled_pearson[k].reset();
      }
    }
  }
  report.fold_outcomes = std::move(outcomes);
  return report;
}

namespace {

FoldOutcome score_fold(std::size_t fold, std::span<const Sample> dataset,
                       const std::vector<std::size_t>& test, const Predictor& predictor) {
  FoldOutcome o;
  o.fold = fold;
  o.test_ids = test;
  for (std::size_t id : test) {
    o.predictions.push_back(predictor.predict(dataset[id]));
    o.labels.push_back(dataset[id].label_array());
  }
  for (const auto& p : o.predictions) {
    for (double v : p) {
      if (!std::isfinite(v)) throw NumericError("non-finite prediction");
    }
  }
  o.mae = mae(o.predictions, o.labels).overall;
  if (test.size() >= 2) {
    for (std::size_t k = 0; k < kNumIndices; ++k) {
      try {
        o.pearson[k] = pearson(column(o.predictions, k), column(o.labels, k));
      } catch (const UndefinedCorrelationError&) {
        o.pearson[k].reset();
      }
    }
  }
  return o;
}

void audit_fold(const Fold& fold, std::span<const Sample* const> train_set,
                std::span<const Sample> dataset) {
  std::unordered_set<std::size_t> test(fold.test.begin(), fold.test.end());
  for (const Sample* s : train_set) {
    const auto idx = static_cast<std::size_t>(s - dataset.data());
    if (idx >= dataset.size() || test.count(idx) != 0) {
      throw ContractError("fold audit: held-out sample " + s->id + " in training set");
    }
  }
}

}  // namespace

EvalReport run_protocol(std::span<const Sample> dataset, Learner& learner,
                        const std::vector<Fold>& folds) {
  if (folds.empty()) throw ArgumentError("run_protocol: no folds");
  std::vector<FoldOutcome> outcomes;
  outcomes.reserve(folds.size());
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const Fold& fold = folds[f];
    for (std::size_t id : fold.train) {
      if (id >= dataset.size()) throw ArgumentError("run_protocol: fold index out of range");
    }
    for (std::size_t id : fold.test) {
      if (id >= dataset.size()) throw ArgumentError("run_protocol: fold index out of range");
    }
    std::vector<const Sample*> train;
    train.reserve(fold.train.size());
    for (std::size_t id : fold.train) train.push_back(&dataset[id]);
    audit_fold(fold, train, dataset);
    try {
      auto predictor = learner.fit(train);
      outcomes.push_back(score_fold(f, dataset, fold.test, *predictor));
    } catch (const TrainingError& e) {
      FoldOutcome o;
      o.fold = f;
      o.failed = true;
      o.error = e.what();
      o.test_ids = fold.test;
      outcomes.push_back(std::move(o));
    } catch (const NumericError& e) {
      FoldOutcome o;
      o.fold = f;
      o.failed = true;
      o.error = e.what();
      o.test_ids = fold.test;
      outcomes.push_back(std::move(o));
    }
  }
  return summarize(learner.name(), std::move(outcomes));
}

EvalReport run_protocol(std::span<const Sample> dataset, Learner& learner, std::size_t k,
                        std::uint64_t seed) {
  return run_protocol(dataset, learner, kfold(dataset.size(), k, seed));
}

EvalReport evaluate_predictor(const std::string& method, std::span<const Sample> dataset,
                              const Predictor& predictor) {
  if (dataset.empty()) throw ArgumentError("evaluate_predictor: empty dataset");
  std::vector<std::size_t> ids(dataset.size());
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  std::vector<FoldOutcome> outcomes;
  outcomes.push_back(score_fold(0, dataset, ids, predictor));
  return summarize(method, std::move(outcomes));
}

}  // namespace dmqca
