// SPDX-License-Identifier: Apache-2.0
#include "dmqca/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "dmqca/errors.hpp"

namespace dmqca {

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0)) throw ArgumentError("learning_rate must be >= 0");
  if (!(lr_decay > 0.0)) throw ArgumentError("lr_decay must be > 0");
  if (!(lambda >= 0.0)) throw ArgumentError("lambda must be >= 0");
  if (batch_size < 1) throw ArgumentError("batch_size must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0))
    throw ArgumentError("Adam betas must lie in [0, 1)");
}

double TrainConfig::learning_rate_at(std::size_t epoch) const {
  return learning_rate * std::pow(lr_decay, static_cast<double>(epoch));
}

void adam_update(const ParameterList& params, AdamState& state, double learning_rate,
                 const TrainConfig& cfg) {
  if (state.first_moment.empty()) {
    for (const auto& p : params) {
      state.first_moment.emplace_back(p.var.shape(), 0.0);
      state.second_moment.emplace_back(p.var.shape(), 0.0);
    }
  }
  if (state.first_moment.size() != params.size())
    throw ContractError("adam_update: parameter list changed between steps");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(cfg.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Var var = params[i].var;
    Tensor& value = var.mutable_value();
    const Tensor& grad = var.grad();
    Tensor& m = state.first_moment[i];
    Tensor& v = state.second_moment[i];
    for (std::size_t j = 0; j < value.size(); ++j) {
      const double g = grad[j];
      m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g;
      v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g * g;
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      value[j] -= learning_rate * m_hat / (std::sqrt(v_hat) + cfg.adam_epsilon);
    }
  }
}

StepResult train_step(std::span<const Sample* const> batch, DmqcaParams& params,
                      AdamState& state, const TrainConfig& train_cfg, const ModelConfig& model_cfg,
                      const AblationConfig& ablation, std::size_t epoch) {
  if (batch.empty()) throw ArgumentError("train_step: empty batch");
  const ParameterList trainable = params.trainable();
  for (const auto& p : trainable) {
    Var v = p.var;
    v.zero_grad();
  }
  std::vector<Var> predictions;
  std::vector<Tensor> labels;
  predictions.reserve(batch.size());
  labels.reserve(batch.size());
  for (const Sample* s : batch) {
    predictions.push_back(forward(*s, params, model_cfg, ablation));
    labels.push_back(s->label);
  }
  Var loss;
  try {
    loss = qca_loss(predictions, labels, trainable, train_cfg.lambda);
  } catch (const NumericError& e) {
    throw TrainingError(std::string("training diverged: ") + e.what(), state.step + 1);
  }
  const double value = loss.value().item();
  if (!std::isfinite(value)) throw TrainingError("training diverged: non-finite loss", state.step + 1);
  backward(loss);
  const double lr = train_cfg.learning_rate_at(epoch);
  adam_update(trainable, state, lr, train_cfg);
  return {value, lr};
}

void prepare_head(DmqcaParams& params, std::span<const Sample* const> train,
                  const TrainConfig& cfg) {
  if (train.empty()) return;
  IndexVector mean{}, var{};
  for (const Sample* s : train)
    for (std::size_t k = 0; k < kNumIndices; ++k) mean[k] += s->label[k];
  for (auto& m : mean) m /= static_cast<double>(train.size());
  for (const Sample* s : train)
    for (std::size_t k = 0; k < kNumIndices; ++k) {
      const double d = s->label[k] - mean[k];
      var[k] += d * d;
    }
  Tensor& offset = params.label_offset.mutable_value();
  Tensor& scale = params.label_scale.mutable_value();
  Tensor& bias = params.output_bias.mutable_value();
  for (std::size_t k = 0; k < kNumIndices; ++k) {
    if (cfg.normalize_labels) {
      const double sd = train.size() > 1 ? std::sqrt(var[k] / static_cast<double>(train.size() - 1)) : 0.0;
      offset[k] = mean[k];
      scale[k] = sd > 0.0 ? sd : 1.0;
      if (cfg.init_output_bias) bias[k] = 0.0;
    } else if (cfg.init_output_bias) {
      bias[k] = mean[k];
    }
  }
}

TrainResult train_model(std::span<const Sample* const> train, const ModelConfig& model_cfg,
                        const AblationConfig& ablation, const TrainConfig& train_cfg,
                        const EpochCallback& on_epoch) {
  train_cfg.validate();
  if (train.empty()) throw ArgumentError("train_model: no training samples");
  const ModelConfig cfg = model_cfg.resolved();
  TrainResult result{DmqcaParams::init(cfg, ablation, train_cfg.seed), {}, {}};
  prepare_head(result.params, train, train_cfg);

  std::mt19937_64 rng(train_cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  AdamState state;
  std::vector<const Sample*> batch;
  for (std::size_t epoch = 0; epoch < train_cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.learning_rate = train_cfg.learning_rate_at(epoch);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += train_cfg.batch_size) {
      batch.clear();
      const std::size_t end = std::min(order.size(), start + train_cfg.batch_size);
      for (std::size_t i = start; i < end; ++i) batch.push_back(train[order[i]]);
      const StepResult step =
          train_step(batch, result.params, state, train_cfg, cfg, ablation, epoch);
      result.step_losses.push_back(step.loss);
      total += step.loss;
      ++rec.steps;
    }
    rec.mean_loss = total / static_cast<double>(rec.steps);
    result.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return result;
}

IndexVector predict(const Sample& sample, const DmqcaParams& params, const ModelConfig& cfg,
                    const AblationConfig& ablation) {
  NoGradGuard no_grad;
  const Var out = forward(sample, params, cfg, ablation);
  IndexVector result{};
  for (std::size_t k = 0; k < kNumIndices; ++k) result[k] = out.value()[k];
  return result;
}

}  // namespace dmqca
