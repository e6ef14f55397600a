// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>

#include "dmqca/encoders.hpp"
#include "dmqca/errors.hpp"

using namespace dmqca;

namespace {

void zero_all(const ParameterList& list) {
  for (const auto& p : list) const_cast<Var&>(p.var).mutable_value().fill(0.0);
}

}  // namespace

TEST(ViewEncoder, DeskShapes) {
  const ViewEncoderConfig cfg;
  EXPECT_EQ(cfg.conv_output_shape(), (Shape{64, 4, 2, 2}));
  EXPECT_EQ(cfg.feature_dim(), 64u);
  std::mt19937_64 rng(1);
  const ViewEncoderParams p = ViewEncoderParams::init(cfg, {}, rng);
  const ViewEncoding enc = encode_view_detailed(Tensor::uniform({4, 64, 64}, -1, 1, rng), cfg, p);
  EXPECT_EQ(enc.conv_map.shape(), (Shape{64, 4, 2, 2}));
  ASSERT_EQ(enc.region_weights.size(), 4u);
  EXPECT_EQ(enc.region_weights[0].shape(), (Shape{4}));
  EXPECT_EQ(enc.frame_weights.shape(), (Shape{4}));
  EXPECT_EQ(enc.view.shape(), (Shape{64}));
}

TEST(ViewEncoder, ZeroInputFixedPoint) {
  std::mt19937_64 rng(2);
  const ViewEncoderConfig cfg;
  const ViewEncoderParams p = ViewEncoderParams::init(cfg, {}, rng);
  const ViewEncoding enc = encode_view_detailed(Tensor({4, 64, 64}), cfg, p);
  for (double v : enc.conv_map.value().values()) EXPECT_EQ(v, 0.0);
  for (double v : enc.view.value().values()) EXPECT_EQ(v, 0.0);
  for (double w : enc.frame_weights.value().values()) EXPECT_DOUBLE_EQ(w, 0.25);
  for (const auto& r : enc.region_weights)
    for (double w : r.value().values()) EXPECT_DOUBLE_EQ(w, 0.25);
}

TEST(ViewEncoder, ZeroGateMatchesNoSelfAttention) {
  std::mt19937_64 rng(3);
  const ViewEncoderConfig cfg;
  const ViewEncoderParams p = ViewEncoderParams::init(cfg, {}, rng);
  const Tensor frames = Tensor::uniform({4, 64, 64}, -1, 1, rng);
  EXPECT_EQ(encode_view(frames, cfg, p, {true, true}).value(),
            encode_view(frames, cfg, p, {false, true}).value());
}

TEST(ViewEncoder, WithoutContextAttentionAverages) {
  std::mt19937_64 rng(4);
  const ViewEncoderConfig cfg;
  const EncoderOptions opt{false, false};
  const ViewEncoderParams p = ViewEncoderParams::init(cfg, opt, rng);
  EXPECT_FALSE(p.region_attention.has_value());
  const ViewEncoding enc = encode_view_detailed(Tensor::uniform({4, 64, 64}, -1, 1, rng), cfg, p, opt);
  const Tensor& m = enc.conv_map.value();
  for (std::size_t c = 0; c < 64; ++c) {
    double acc = 0.0;
    for (std::size_t i = 0; i < 16; ++i) acc += m[c * 16 + i];
    EXPECT_NEAR(enc.view.value()[c], acc / 16.0, 1e-14);
  }
}

TEST(ViewEncoder, Errors) {
  std::mt19937_64 rng(5);
  ViewEncoderConfig cfg;
  const ViewEncoderParams p = ViewEncoderParams::init(cfg, {false, false}, rng);
  EXPECT_THROW(encode_view(Tensor({4, 32, 32}), cfg, p, {false, false}), DimensionError);
  EXPECT_THROW(encode_view(Tensor({4, 64, 64}), cfg, p, {true, true}), ArgumentError);
  cfg.filters[2] = 0;
  EXPECT_THROW(cfg.validate(), DimensionError);
}

TEST(KeyframeEncoder, SpatialTrail) {
  const KeyframeEncoderConfig cfg;
  const std::vector<Pair> trail = cfg.spatial_trail();
  const std::vector<std::size_t> expected{64, 32, 16, 8, 4, 2, 1};
  ASSERT_EQ(trail.size(), expected.size());
  for (std::size_t i = 0; i < trail.size(); ++i) EXPECT_EQ(trail[i], (Pair{expected[i], expected[i]}));
  EXPECT_EQ(cfg.flattened_size(), 32u);
}

TEST(KeyframeEncoder, TooSmallInputRejected) {
  KeyframeEncoderConfig cfg;
  cfg.height = cfg.width = 32;
  EXPECT_THROW(cfg.validate(), DimensionError);
}

TEST(KeyframeEncoder, ZeroImageZeroBiasesGivesZero) {
  std::mt19937_64 rng(6);
  const KeyframeEncoderConfig cfg;
  const KeyframeEncoderParams p = KeyframeEncoderParams::init(cfg, rng);
  const Tensor k = encode_keyframe(Tensor({64, 64}), cfg, p).value();
  EXPECT_EQ(k.shape(), (Shape{64}));
  for (double v : k.values()) EXPECT_EQ(v, 0.0);
}

TEST(KeyframeEncoder, ZeroResidualWeightsLeaveSkipPath) {
  std::mt19937_64 rng(7);
  const KeyframeEncoderConfig cfg;
  const KeyframeEncoderParams p = KeyframeEncoderParams::init(cfg, rng);
  const auto& block = p.blocks[1];
  ParameterList list;
  for (const auto& u : block.units)
    for (const Var* v : {&u.conv1, &u.bias1, &u.conv2, &u.bias2}) list.push_back({"", *v});
  zero_all(list);
  const Tensor x = Tensor::uniform({8, 16, 16}, -1, 1, rng);
  const Tensor y = dilated_residual_block(Var::constant(x), block, 1, 0.2).value();
  const Tensor pooled = maxpool2d(Var::constant(x), 2, 2).value();
  EXPECT_EQ(y, pooled);
}

TEST(KeyframeEncoder, ResidualUnitZeroPadsSkip) {
  std::mt19937_64 rng(8);
  const KeyframeEncoderConfig cfg;
  const KeyframeEncoderParams p = KeyframeEncoderParams::init(cfg, rng);
  const auto& unit = p.blocks[2].units[0];  // 8 -> 16 channels
  ParameterList list;
  for (const Var* v : {&unit.conv1, &unit.bias1, &unit.conv2, &unit.bias2}) list.push_back({"", *v});
  zero_all(list);
  const Tensor x = Tensor::uniform({8, 8, 8}, -1, 1, rng);
  const Tensor y = residual_unit(Var::constant(x), unit, 2, 0.2).value();
  ASSERT_EQ(y.shape(), (Shape{16, 8, 8}));
  for (std::size_t i = 0; i < y.size(); ++i) EXPECT_EQ(y[i], i < x.size() ? x[i] : 0.0);
}
