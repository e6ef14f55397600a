// SPDX-License-Identifier: Apache-2.0
#include "dmqca/attention.hpp"

#include <algorithm>
#include <cmath>

#include "dmqca/errors.hpp"
#include "dmqca/ops.hpp"

namespace dmqca {

namespace {

Var xavier(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  return Var::parameter(Tensor::uniform(Shape{rows, cols}, -bound, bound, rng));
}

}  // namespace

std::size_t reduced_channels(std::size_t channels) { return std::max<std::size_t>(1, channels / 8); }

SelfAttentionParams SelfAttentionParams::init(std::size_t channels, std::mt19937_64& rng) {
  const std::size_t reduced = reduced_channels(channels);
  SelfAttentionParams p;
  p.query = xavier(reduced, channels, rng);
  p.key = xavier(reduced, channels, rng);
  p.value = xavier(channels, channels, rng);
  p.gamma = Var::parameter(Tensor::scalar(0.0));
  return p;
}

ContextAttentionParams ContextAttentionParams::init(std::size_t features,
                                                    std::size_t attention_dim,
                                                    std::mt19937_64& rng) {
  if (attention_dim < 1) throw ArgumentError("context attention dimension must be >= 1");
  ContextAttentionParams p;
  p.weight = xavier(attention_dim, features, rng);
  p.bias = Var::parameter(Tensor(Shape{attention_dim}, 0.0));
  const double bound = 1.0 / std::sqrt(static_cast<double>(attention_dim));
  p.context = Var::parameter(Tensor::uniform(Shape{attention_dim}, -bound, bound, rng));
  return p;
}

SelfAttentionResult self_attention_with_weights(const Var& x, const SelfAttentionParams& p) {
  if (x.value().rank() != 2) throw DimensionError("self_attention: expected [C, M] feature map");
  const std::size_t C = x.shape()[0];
  if (p.value.shape() != Shape{C, C} || p.query.shape()[1] != C || p.key.shape()[1] != C ||
      p.query.shape() != p.key.shape())
    throw DimensionError("self_attention: parameters do not match " + std::to_string(C) +
                         " channels");
  const Var f = one_by_one_conv(x, p.query);  // [C', M]
  const Var g = one_by_one_conv(x, p.key);    // [C', M]
  const Var h = one_by_one_conv(x, p.value);  // [C, M]
  const Var scores = matmul(transpose(f), g);  // S[i][j] = f_i . g_j
  const Var alpha = softmax(scores, 0);        // normalised over source i per target j
  const Var attended = matmul(h, alpha);       // o'[:, j] = sum_i alpha[i][j] h[:, i]
  return {add(x, scale_by(attended, p.gamma)), alpha};
}

Var self_attention(const Var& x, const SelfAttentionParams& p) {
  return self_attention_with_weights(x, p).output;
}

ContextAttentionResult context_attention(const Var& items, const ContextAttentionParams& p) {
  if (items.value().rank() != 2) throw DimensionError("context_attention: expected [F, R] items");
  const std::size_t F = items.shape()[0];
  const std::size_t A = p.context.shape()[0];
  if (p.weight.shape() != Shape{A, F} || p.bias.shape() != Shape{A})
    throw DimensionError("context_attention: parameters do not match feature size " +
                         std::to_string(F));
  const Var hidden = tanh(add_channel_bias(matmul(p.weight, items), p.bias));  // [A, R]
  const Var scores = matvec(transpose(hidden), p.context);                      // [R]
  const Var weights = softmax(scores, 0);
  return {matvec(items, weights), weights};
}

}  // namespace dmqca
