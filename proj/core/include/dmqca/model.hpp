// SPDX-License-Identifier: Apache-2.0
//
// The full quantification network: main-view and support-view encoders, a
// keyframe encoder, and a two-layer regression head producing the six
// stenosis indices (RVD1, RVD2, RVD, MLD, LL1, LL2) in millimetres.

#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dmqca/encoders.hpp"
#include "dmqca/parameters.hpp"
#include "dmqca/sample.hpp"

namespace dmqca {

struct ModelConfig {
  ViewEncoderConfig view;
  KeyframeEncoderConfig keyframe;
  std::size_t hidden_units = 512;
  double leaky_slope = kDefaultLeakySlope;
  /// Fixed map applied to every input pixel: scale * (x - offset).
  double input_offset = 0.85;
  double input_scale = -2.0;

  /// T=4, 64x64 frames, filters [8,16,32,64,64].
  static ModelConfig desk();
  /// T=10, 256x256 frames, filters [16,32,64,128,256].
  static ModelConfig paper_scale();

  std::size_t feature_dim() const { return view.feature_dim(); }
  /// Propagates shared fields (slope, keyframe feature size) and validates.
  ModelConfig resolved() const;
  void validate() const;
};

struct AblationConfig {
  bool use_main = true;
  bool use_support = true;
  bool use_keyframe = true;
  bool use_self_attention = true;
  bool use_context_attention = true;

  std::size_t enabled_branches() const;
  void validate() const;

  /// Names: "Ours", "Ours-SelfAtt", "Main", "Main-ConAtt",
  /// "Main+Key", "Sup+Key", "Key".
  static AblationConfig from_name(const std::string& name);
  static const std::vector<std::string>& names();
  bool operator==(const AblationConfig&) const = default;
};

/// Stable text form of the model and ablation configuration, hashed into
/// checkpoint fingerprints.
std::string canonical_config_text(const ModelConfig& model, const AblationConfig& ablation);
std::uint64_t config_fingerprint(const ModelConfig& model, const AblationConfig& ablation);

struct DmqcaParams {
  std::optional<ViewEncoderParams> main_view;
  std::optional<ViewEncoderParams> support_view;
  std::optional<KeyframeEncoderParams> keyframe;
  Var hidden_weight;  // W1 [hidden, branches * feature_dim]
  Var hidden_bias;    // b1 [hidden]
  Var output_weight;  // Wo [6, hidden]
  Var output_bias;    // bo [6]
  // Fixed affine map applied to the head output; identity unless label
  // normalisation is enabled in training.
  Var label_offset;  // [6]
  Var label_scale;   // [6]

  static DmqcaParams init(const ModelConfig& cfg, const AblationConfig& ablation,
                          std::uint64_t seed);

  /// Every persisted tensor in a fixed order; only branches present in the
  /// ablation appear.
  ParameterList parameters() const;
  ParameterList trainable() const;
};

/// Prediction vector [6] for one sample. Disabled branches' inputs are not read.
Var forward(const Sample& sample, const DmqcaParams& params, const ModelConfig& cfg,
            const AblationConfig& ablation);

/// Applies the fixed input map of `cfg` to an image or sequence.
Tensor prepare_input(const Tensor& pixels, const ModelConfig& cfg);

/// Regression head applied to the concatenated branch features.
Var regression_head(const Var& features, const DmqcaParams& params, double slope);

/// (1 / (6N)) * sum |pred - label| + lambda * sum of squared regularised weights.
Var qca_loss(std::span<const Var> predictions, std::span<const Tensor> labels,
             const ParameterList& parameters, double lambda);

}  // namespace dmqca
