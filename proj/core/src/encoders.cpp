// SPDX-License-Identifier: Apache-2.0
#include "dmqca/encoders.hpp"

#include <cmath>
#include <string>

#include "dmqca/errors.hpp"

namespace dmqca {

namespace {

constexpr Triple kViewStride{1, 2, 2};

// Kaiming-uniform for leaky activations.
Var kaiming(Shape shape, std::size_t fan_in, double slope, std::mt19937_64& rng) {
  const double gain = std::sqrt(2.0 / (1.0 + slope * slope));
  const double bound = gain * std::sqrt(3.0 / static_cast<double>(fan_in));
  return Var::parameter(Tensor::uniform(std::move(shape), -bound, bound, rng));
}

Var zeros(Shape shape) { return Var::parameter(Tensor(std::move(shape), 0.0)); }

Triple same_padding(const Triple& k) { return {k[0] / 2, k[1] / 2, k[2] / 2}; }

std::size_t strided_extent(std::size_t n, std::size_t k, std::size_t pad, std::size_t stride) {
  const std::size_t padded = n + 2 * pad;
  if (k > padded) return 0;
  return (padded - k) / stride + 1;
}

}  // namespace

Shape ViewEncoderConfig::conv_output_shape() const {
  std::size_t t = frames, h = height, w = width;
  for (std::size_t s = 0; s < kViewConvStages; ++s) {
    const Triple pad = same_padding(kernels[s]);
    t = strided_extent(t, kernels[s][0], pad[0], kViewStride[0]);
    h = strided_extent(h, kernels[s][1], pad[1], kViewStride[1]);
    w = strided_extent(w, kernels[s][2], pad[2], kViewStride[2]);
    if (t == 0 || h == 0 || w == 0)
      throw DimensionError("view encoder: stage " + std::to_string(s) + " kernel does not fit");
  }
  return {filters.back(), t, h, w};
}

void ViewEncoderConfig::validate() const {
  if (frames < 1) throw DimensionError("view encoder: need at least one frame");
  constexpr std::size_t reduction = std::size_t{1} << kViewConvStages;
  if (height % reduction != 0 || width % reduction != 0)
    throw DimensionError("view encoder: height and width must be divisible by " +
                         std::to_string(reduction) + ", got " + std::to_string(height) + "x" +
                         std::to_string(width));
  for (auto f : filters)
    if (f < 1) throw DimensionError("view encoder: filter counts must be >= 1");
  for (const auto& k : kernels)
    for (auto e : k)
      if (e < 1) throw DimensionError("view encoder: kernel extents must be >= 1");
  conv_output_shape();
}

ViewEncoderParams ViewEncoderParams::init(const ViewEncoderConfig& cfg,
                                          const EncoderOptions& options, std::mt19937_64& rng) {
  cfg.validate();
  ViewEncoderParams p;
  std::size_t in_channels = 1;
  for (std::size_t s = 0; s < kViewConvStages; ++s) {
    const Triple& k = cfg.kernels[s];
    const std::size_t fan_in = in_channels * k[0] * k[1] * k[2];
    p.kernels[s] = kaiming({cfg.filters[s], in_channels, k[0], k[1], k[2]}, fan_in,
                           cfg.leaky_slope, rng);
    p.biases[s] = zeros({cfg.filters[s]});
    in_channels = cfg.filters[s];
  }
  const std::size_t features = cfg.feature_dim();
  if (options.use_self_attention) p.self_attention = SelfAttentionParams::init(features, rng);
  if (options.use_context_attention) {
    p.region_attention = ContextAttentionParams::init(features, cfg.resolved_attention_dim(), rng);
    p.frame_attention = ContextAttentionParams::init(features, cfg.resolved_attention_dim(), rng);
  }
  return p;
}

void ViewEncoderParams::collect(const std::string& prefix, ParameterList& out) const {
  for (std::size_t s = 0; s < kViewConvStages; ++s) {
    out.push_back({prefix + ".conv" + std::to_string(s) + ".weight", kernels[s], true, true});
    out.push_back({prefix + ".conv" + std::to_string(s) + ".bias", biases[s], false, true});
  }
  if (self_attention) {
    out.push_back({prefix + ".self_attention.query", self_attention->query, true, true});
    out.push_back({prefix + ".self_attention.key", self_attention->key, true, true});
    out.push_back({prefix + ".self_attention.value", self_attention->value, true, true});
    out.push_back({prefix + ".self_attention.gamma", self_attention->gamma, false, true});
  }
  const auto add_context = [&](const std::string& name, const ContextAttentionParams& c) {
    out.push_back({prefix + "." + name + ".weight", c.weight, true, true});
    out.push_back({prefix + "." + name + ".bias", c.bias, false, true});
    out.push_back({prefix + "." + name + ".context", c.context, true, true});
  };
  if (region_attention) add_context("region_attention", *region_attention);
  if (frame_attention) add_context("frame_attention", *frame_attention);
}

ViewEncoding encode_view_detailed(const Tensor& frames, const ViewEncoderConfig& cfg,
                                  const ViewEncoderParams& params,
                                  const EncoderOptions& options) {
  const Shape expected{cfg.frames, cfg.height, cfg.width};
  if (frames.shape() != expected)
    throw DimensionError("encode_view: expected frames " + shape_str(expected) + ", got " +
                         shape_str(frames.shape()));
  if (options.use_self_attention && !params.self_attention)
    throw ArgumentError("encode_view: self-attention enabled but parameters missing");
  if (options.use_context_attention && (!params.region_attention || !params.frame_attention))
    throw ArgumentError("encode_view: context attention enabled but parameters missing");

  Var x = Var::constant(frames.reshaped({1, cfg.frames, cfg.height, cfg.width}));
  for (std::size_t s = 0; s < kViewConvStages; ++s) {
    x = conv3d(x, params.kernels[s], kViewStride, same_padding(cfg.kernels[s]));
    x = leaky_relu(add_channel_bias(x, params.biases[s]), cfg.leaky_slope);
  }

  ViewEncoding enc;
  enc.conv_map = x;
  const std::size_t T = x.shape()[1];
  std::vector<Var> frame_vectors;
  frame_vectors.reserve(T);
  for (std::size_t t = 0; t < T; ++t) {
    Var regions = take_frame(x, t);  // [C, M]
    if (options.use_self_attention) regions = self_attention(regions, *params.self_attention);
    if (options.use_context_attention) {
      auto r = context_attention(regions, *params.region_attention);
      frame_vectors.push_back(r.summary);
      enc.region_weights.push_back(r.weights);
    } else {
      frame_vectors.push_back(mean_columns(regions));
    }
  }
  const Var per_frame = stack_columns(frame_vectors);  // [C, T]
  if (options.use_context_attention) {
    auto f = context_attention(per_frame, *params.frame_attention);
    enc.view = f.summary;
    enc.frame_weights = f.weights;
  } else {
    enc.view = mean_columns(per_frame);
  }
  return enc;
}

Var encode_view(const Tensor& frames, const ViewEncoderConfig& cfg,
                const ViewEncoderParams& params, const EncoderOptions& options) {
  return encode_view_detailed(frames, cfg, params, options).view;
}

std::vector<Pair> KeyframeEncoderConfig::spatial_trail() const {
  std::vector<Pair> trail{{height, width}};
  Pair hw{height, width};
  for (std::size_t b = 0; b < kKeyframeBlocks; ++b) {
    if (hw[0] < 2 || hw[1] < 2)
      throw DimensionError("keyframe encoder: " + std::to_string(height) + "x" +
                           std::to_string(width) + " input is too small for " +
                           std::to_string(kKeyframeBlocks) + " pooling halvings");
    hw = {hw[0] / 2, hw[1] / 2};
    trail.push_back(hw);
  }
  return trail;
}

std::size_t KeyframeEncoderConfig::flattened_size() const {
  const Pair last = spatial_trail().back();
  return widths.back() * last[0] * last[1];
}

void KeyframeEncoderConfig::validate() const {
  std::size_t prev = 1;
  for (std::size_t b = 0; b < kKeyframeBlocks; ++b) {
    if (widths[b] < prev)
      throw DimensionError("keyframe encoder: block widths must be non-decreasing");
    if (dilations[b] < 1) throw ArgumentError("keyframe encoder: dilation must be >= 1");
    prev = widths[b];
  }
  if (feature_dim < 1) throw DimensionError("keyframe encoder: feature_dim must be >= 1");
  spatial_trail();
}

KeyframeEncoderParams KeyframeEncoderParams::init(const KeyframeEncoderConfig& cfg,
                                                  std::mt19937_64& rng) {
  cfg.validate();
  KeyframeEncoderParams p;
  std::size_t in_channels = 1;
  for (std::size_t b = 0; b < kKeyframeBlocks; ++b) {
    const std::size_t c = cfg.widths[b];
    for (std::size_t u = 0; u < 2; ++u) {
      const std::size_t cin = u == 0 ? in_channels : c;
      ResidualUnitParams& unit = p.blocks[b].units[u];
      unit.conv1 = kaiming({c, cin, 3, 3}, cin * 9, cfg.leaky_slope, rng);
      unit.bias1 = zeros({c});
      // The residual branch starts small so each unit begins near identity.
      Var w2 = kaiming({c, c, 3, 3}, c * 9, cfg.leaky_slope, rng);
      for (auto& v : w2.mutable_value().values()) v *= 0.5;
      unit.conv2 = w2;
      unit.bias2 = zeros({c});
    }
    in_channels = c;
  }
  const std::size_t flat = cfg.flattened_size();
  const double bound = std::sqrt(6.0 / static_cast<double>(flat + cfg.feature_dim));
  p.fc_weight = Var::parameter(Tensor::uniform({cfg.feature_dim, flat}, -bound, bound, rng));
  p.fc_bias = zeros({cfg.feature_dim});
  return p;
}

void KeyframeEncoderParams::collect(const std::string& prefix, ParameterList& out) const {
  for (std::size_t b = 0; b < kKeyframeBlocks; ++b)
    for (std::size_t u = 0; u < 2; ++u) {
      const std::string base =
          prefix + ".block" + std::to_string(b) + ".unit" + std::to_string(u);
      const ResidualUnitParams& unit = blocks[b].units[u];
      out.push_back({base + ".conv1.weight", unit.conv1, true, true});
      out.push_back({base + ".conv1.bias", unit.bias1, false, true});
      out.push_back({base + ".conv2.weight", unit.conv2, true, true});
      out.push_back({base + ".conv2.bias", unit.bias2, false, true});
    }
  out.push_back({prefix + ".fc.weight", fc_weight, true, true});
  out.push_back({prefix + ".fc.bias", fc_bias, false, true});
}

Var residual_unit(const Var& x, const ResidualUnitParams& p, std::size_t dilation, double slope) {
  const Pair pad{dilation, dilation};
  const Pair dil{dilation, dilation};
  Var branch = conv2d(x, p.conv1, {1, 1}, pad, dil);
  branch = leaky_relu(add_channel_bias(branch, p.bias1), slope);
  branch = add_channel_bias(conv2d(branch, p.conv2, {1, 1}, pad, dil), p.bias2);
  return add(pad_channels(x, branch.shape()[0]), branch);
}

Var dilated_residual_block(const Var& x, const DilatedResidualBlockParams& p,
                           std::size_t dilation, double slope) {
  Var y = residual_unit(x, p.units[0], dilation, slope);
  y = residual_unit(y, p.units[1], dilation, slope);
  return maxpool2d(y, 2, 2);
}

Var encode_keyframe(const Tensor& image, const KeyframeEncoderConfig& cfg,
                    const KeyframeEncoderParams& params) {
  const Shape expected{cfg.height, cfg.width};
  if (image.shape() != expected)
    throw DimensionError("encode_keyframe: expected image " + shape_str(expected) + ", got " +
                         shape_str(image.shape()));
  cfg.spatial_trail();
  Var x = Var::constant(image.reshaped({1, cfg.height, cfg.width}));
  for (std::size_t b = 0; b < kKeyframeBlocks; ++b)
    x = dilated_residual_block(x, params.blocks[b], cfg.dilations[b], cfg.leaky_slope);
  const Var flat = reshape(x, {x.value().size()});
  return add(matvec(params.fc_weight, flat), params.fc_bias);
}

}  // namespace dmqca
