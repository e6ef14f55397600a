// SPDX-License-Identifier: Apache-2.0
//
// Self-attention over a [C, M] feature map (pairwise position weighting with
// a zero-initialised residual gate) and context attention, which scores a set
// of feature vectors against a learned context vector and returns their
// softmax-weighted sum.

#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "dmqca/autodiff.hpp"

namespace dmqca {

/// Channel count of the query/key projections: max(1, floor(C / 8)).
std::size_t reduced_channels(std::size_t channels);

struct SelfAttentionParams {
  Var query;  // Wf [C/8, C]
  Var key;    // Wg [C/8, C]
  Var value;  // Wh [C, C]
  Var gamma;  // scalar gate, 0 at initialisation

  static SelfAttentionParams init(std::size_t channels, std::mt19937_64& rng);
};

struct ContextAttentionParams {
  Var weight;   // W [A, F]
  Var bias;     // b [A]
  Var context;  // u [A]

  static ContextAttentionParams init(std::size_t features, std::size_t attention_dim,
                                     std::mt19937_64& rng);
};

struct SelfAttentionResult {
  Var output;   // [C, M]
  Var weights;  // [M_source, M_target]; column j holds alpha_{j, .}
};

/// o_j = x_j + gamma * sum_i alpha_{j,i} h_i with
/// alpha_{j,i} = softmax_i(f_i . g_j), f = Wf x, g = Wg x, h = Wh x.
SelfAttentionResult self_attention_with_weights(const Var& x, const SelfAttentionParams& p);
Var self_attention(const Var& x, const SelfAttentionParams& p);

struct ContextAttentionResult {
  Var summary;  // [F]
  Var weights;  // [R]
};

/// items [F, R]: u'_r = tanh(W item_r + b), score_r = u'_r . u,
/// weights = softmax(score), summary = sum_r weights_r item_r.
ContextAttentionResult context_attention(const Var& items, const ContextAttentionParams& p);

}  // namespace dmqca
