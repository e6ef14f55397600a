// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "dmqca/model.hpp"

namespace dmqca {

struct TrainConfig {
  double learning_rate = 2e-4;
  /// Multiplicative learning-rate decay applied once per epoch.
  double lr_decay = 0.97;
  double lambda = 1e-6;
  std::size_t epochs = 30;
  std::size_t batch_size = 4;
  std::uint64_t seed = 1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  /// Learn in z-scored label units (the loss itself stays in millimetres).
  bool normalize_labels = false;
  /// Start the output bias at the training-label mean.
  bool init_output_bias = true;

  void validate() const;
  double learning_rate_at(std::size_t epoch) const;
};

struct AdamState {
  std::size_t step = 0;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
};

/// One bias-corrected Adam update of every parameter in `params` from its
/// accumulated gradient.
void adam_update(const ParameterList& params, AdamState& state, double learning_rate,
                 const TrainConfig& cfg);

struct StepResult {
  double loss = 0.0;
  double learning_rate = 0.0;
};

/// Forward, mean-absolute-error loss over the batch, backward, one Adam update.
/// Throws TrainingError carrying the step index on a non-finite loss.
StepResult train_step(std::span<const Sample* const> batch, DmqcaParams& params,
                      AdamState& state, const TrainConfig& train_cfg, const ModelConfig& model_cfg,
                      const AblationConfig& ablation, std::size_t epoch);

struct EpochRecord {
  std::size_t epoch = 0;
  double learning_rate = 0.0;
  double mean_loss = 0.0;
  std::size_t steps = 0;
};

struct TrainResult {
  DmqcaParams params;
  std::vector<EpochRecord> epochs;
  std::vector<double> step_losses;
};

/// Sets the data-dependent head initialisation (label normalisation
/// buffers and output bias) from the training labels.
void prepare_head(DmqcaParams& params, std::span<const Sample* const> train,
                  const TrainConfig& cfg);

using EpochCallback = std::function<void(const EpochRecord&)>;

TrainResult train_model(std::span<const Sample* const> train, const ModelConfig& model_cfg,
                        const AblationConfig& ablation, const TrainConfig& train_cfg,
                        const EpochCallback& on_epoch = {});

/// Forward pass without recording gradients; returns the six indices.
IndexVector predict(const Sample& sample, const DmqcaParams& params, const ModelConfig& cfg,
                    const AblationConfig& ablation);

}  // namespace dmqca
