// SPDX-License-Identifier: Apache-2.0
//
// View encoder: five stride-(1,2,2) 3-D convolutions over a 2D+T sequence,
// self-attention on each frame's final feature map, region-level context
// attention per frame and frame-level context attention across frames.
//
// Keyframe encoder: six dilated residual blocks (two residual units of two
// 3x3 convolutions, then 2x2 max pooling) and a fully connected projection
// to the view feature size.

#pragma once

#include <array>
#include <optional>
#include <random>

#include "dmqca/attention.hpp"
#include "dmqca/ops.hpp"
#include "dmqca/parameters.hpp"

namespace dmqca {

inline constexpr std::size_t kViewConvStages = 5;
inline constexpr std::size_t kKeyframeBlocks = 6;

struct EncoderOptions {
  bool use_self_attention = true;
  /// When false both context-attention levels become uniform averages.
  bool use_context_attention = true;
};

struct ViewEncoderConfig {
  std::size_t frames = 4;
  std::size_t height = 64;
  std::size_t width = 64;
  std::array<std::size_t, kViewConvStages> filters{8, 16, 32, 64, 64};
  std::array<Triple, kViewConvStages> kernels{
      Triple{3, 3, 3}, Triple{3, 3, 3}, Triple{3, 3, 3}, Triple{3, 3, 3}, Triple{3, 3, 3}};
  /// Hidden size of both context-attention levels; 0 means feature_dim().
  std::size_t attention_dim = 0;
  double leaky_slope = kDefaultLeakySlope;

  /// Size of the view vector v: the channel count of the last stage.
  std::size_t feature_dim() const { return filters.back(); }
  std::size_t resolved_attention_dim() const {
    return attention_dim == 0 ? feature_dim() : attention_dim;
  }
  /// [C, T', H', W'] after the convolution stack.
  Shape conv_output_shape() const;
  void validate() const;
};

struct ViewEncoderParams {
  std::array<Var, kViewConvStages> kernels;
  std::array<Var, kViewConvStages> biases;
  std::optional<SelfAttentionParams> self_attention;
  std::optional<ContextAttentionParams> region_attention;
  std::optional<ContextAttentionParams> frame_attention;

  static ViewEncoderParams init(const ViewEncoderConfig& cfg, const EncoderOptions& options,
                                std::mt19937_64& rng);
  void collect(const std::string& prefix, ParameterList& out) const;
};

struct ViewEncoding {
  Var view;                        // v [F]
  Var conv_map;                    // [C, T', H', W']
  std::vector<Var> region_weights;  // per frame, [M]
  Var frame_weights;               // [T']
};

ViewEncoding encode_view_detailed(const Tensor& frames, const ViewEncoderConfig& cfg,
                                  const ViewEncoderParams& params,
                                  const EncoderOptions& options = {});
/// frames [T, H, W] -> v [feature_dim].
Var encode_view(const Tensor& frames, const ViewEncoderConfig& cfg,
                const ViewEncoderParams& params, const EncoderOptions& options = {});

struct KeyframeEncoderConfig {
  std::size_t height = 64;
  std::size_t width = 64;
  std::array<std::size_t, kKeyframeBlocks> widths{8, 8, 16, 16, 32, 32};
  std::array<std::size_t, kKeyframeBlocks> dilations{1, 1, 2, 2, 4, 4};
  std::size_t feature_dim = 64;
  double leaky_slope = kDefaultLeakySlope;

  /// Spatial extents after each block's pooling, starting with the input.
  std::vector<Pair> spatial_trail() const;
  std::size_t flattened_size() const;
  void validate() const;
};

struct ResidualUnitParams {
  Var conv1, bias1, conv2, bias2;
};

struct DilatedResidualBlockParams {
  std::array<ResidualUnitParams, 2> units;
};

struct KeyframeEncoderParams {
  std::array<DilatedResidualBlockParams, kKeyframeBlocks> blocks;
  Var fc_weight;  // [feature_dim, flattened]
  Var fc_bias;    // [feature_dim]

  static KeyframeEncoderParams init(const KeyframeEncoderConfig& cfg, std::mt19937_64& rng);
  void collect(const std::string& prefix, ParameterList& out) const;
};

/// y = pad_channels(x, C_out) + conv2(act(conv1(x) + b1)) + b2, "same" padding.
Var residual_unit(const Var& x, const ResidualUnitParams& p, std::size_t dilation, double slope);
/// Two residual units followed by 2x2 max pooling.
Var dilated_residual_block(const Var& x, const DilatedResidualBlockParams& p,
                           std::size_t dilation, double slope);
/// image [H, W] -> K [feature_dim].
Var encode_keyframe(const Tensor& image, const KeyframeEncoderConfig& cfg,
                    const KeyframeEncoderParams& params);

}  // namespace dmqca
