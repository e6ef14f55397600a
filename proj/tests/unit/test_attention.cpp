// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>

#include "dmqca/attention.hpp"
#include "dmqca/ops.hpp"

using namespace dmqca;

TEST(SelfAttention, ReducedChannels) {
  EXPECT_EQ(reduced_channels(1), 1u);
  EXPECT_EQ(reduced_channels(7), 1u);
  EXPECT_EQ(reduced_channels(12), 1u);
  EXPECT_EQ(reduced_channels(16), 2u);
  EXPECT_EQ(reduced_channels(64), 8u);
}

TEST(SelfAttention, GateStartsAtZeroAndIsIdentity) {
  std::mt19937_64 rng(1);
  for (std::size_t C : {1u, 5u, 8u, 20u}) {
    const SelfAttentionParams p = SelfAttentionParams::init(C, rng);
    EXPECT_EQ(p.gamma.value().item(), 0.0);
    EXPECT_EQ(p.query.shape(), (Shape{reduced_channels(C), C}));
    const Tensor x = Tensor::uniform({C, 6}, -5, 5, rng);
    EXPECT_EQ(self_attention(Var::constant(x), p).value(), x);
  }
}

TEST(SelfAttention, SinglePosition) {
  std::mt19937_64 rng(2);
  SelfAttentionParams p = SelfAttentionParams::init(3, rng);
  p.gamma.mutable_value()[0] = 0.7;
  const Tensor x = Tensor::uniform({3, 1}, -1, 1, rng);
  const auto r = self_attention_with_weights(Var::constant(x), p);
  EXPECT_EQ(r.weights.value().item(), 1.0);
  const Tensor h = matmul(p.value, Var::constant(x)).value();
  for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(r.output.value()[c], x[c] + 0.7 * h[c], 1e-15);
}

TEST(SelfAttention, WeightsAreColumnStochastic) {
  std::mt19937_64 rng(3);
  const SelfAttentionParams p = SelfAttentionParams::init(8, rng);
  const auto r = self_attention_with_weights(Var::constant(Tensor::uniform({8, 5}, -1, 1, rng)), p);
  for (std::size_t j = 0; j < 5; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < 5; ++i) s += r.weights.value().at({i, j});
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(ContextAttention, IdenticalItemsGiveUniformWeights) {
  std::mt19937_64 rng(4);
  const ContextAttentionParams p = ContextAttentionParams::init(3, 4, rng);
  Tensor items({3, 5});
  for (std::size_t f = 0; f < 3; ++f)
    for (std::size_t r = 0; r < 5; ++r) items.at({f, r}) = 0.25 * static_cast<double>(f) - 0.3;
  const auto out = context_attention(Var::constant(items), p);
  for (double w : out.weights.value().values()) EXPECT_NEAR(w, 0.2, 1e-15);
  for (std::size_t f = 0; f < 3; ++f) EXPECT_NEAR(out.summary.value()[f], items.at({f, 0}), 1e-15);
}

TEST(ContextAttention, SingleItem) {
  std::mt19937_64 rng(5);
  const ContextAttentionParams p = ContextAttentionParams::init(4, 2, rng);
  const Tensor items = Tensor::uniform({4, 1}, -1, 1, rng);
  const auto out = context_attention(Var::constant(items), p);
  EXPECT_EQ(out.weights.value().item(), 1.0);
  EXPECT_EQ(out.summary.value(), items.reshaped({4}));
}

TEST(ContextAttention, SummaryInConvexHull) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const ContextAttentionParams p = ContextAttentionParams::init(6, 3, rng);
    const Tensor items = Tensor::uniform({6, 7}, -10, 10, rng);
    const Tensor s = context_attention(Var::constant(items), p).summary.value();
    for (std::size_t f = 0; f < 6; ++f) {
      double lo = items.at({f, 0}), hi = lo;
      for (std::size_t r = 1; r < 7; ++r) {
        lo = std::min(lo, items.at({f, r}));
        hi = std::max(hi, items.at({f, r}));
      }
      EXPECT_GE(s[f], lo - 1e-12);
      EXPECT_LE(s[f], hi + 1e-12);
    }
  }
}

TEST(ContextAttention, ContextVectorIsTrainable) {
  std::mt19937_64 rng(7);
  const ContextAttentionParams p = ContextAttentionParams::init(4, 3, rng);
  EXPECT_TRUE(p.context.requires_grad());
  EXPECT_TRUE(p.weight.requires_grad());
}
