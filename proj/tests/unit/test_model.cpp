// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "dmqca/errors.hpp"
#include "dmqca/model.hpp"
#include "toy.hpp"

using namespace dmqca;

TEST(Model, ZeroInputsAndWeightsGiveLeakyOutputBias) {
  const ModelConfig cfg = toy::small_model();
  const AblationConfig ab;
  DmqcaParams p = DmqcaParams::init(cfg, ab, 1);
  for (const auto& np : p.trainable()) const_cast<Var&>(np.var).mutable_value().fill(0.0);
  const std::vector<double> bo{-1.0, -0.5, 0.0, 0.5, 1.0, 2.0};
  for (std::size_t i = 0; i < 6; ++i) p.output_bias.mutable_value()[i] = bo[i];
  Sample s;
  s.main_view = s.support_view = Tensor({4, 64, 64});
  s.keyframe = Tensor({64, 64});
  const Tensor y = forward(s, p, cfg, ab).value();
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(y[i], bo[i] > 0 ? bo[i] : cfg.leaky_slope * bo[i]);
}

TEST(Model, KeyOnlyHeadWidthIsFeatureDim) {
  const ModelConfig cfg = ModelConfig::desk();
  const DmqcaParams p = DmqcaParams::init(cfg, AblationConfig::from_name("Key"), 2);
  EXPECT_EQ(p.hidden_weight.shape(), (Shape{512, cfg.feature_dim()}));
  EXPECT_FALSE(p.main_view.has_value());
  EXPECT_FALSE(p.support_view.has_value());
  for (const auto& np : p.parameters())
    EXPECT_TRUE(np.name.starts_with("keyframe.") || np.name.starts_with("head.")) << np.name;
  const DmqcaParams full = DmqcaParams::init(cfg, {}, 2);
  EXPECT_EQ(full.hidden_weight.shape(), (Shape{512, 3 * cfg.feature_dim()}));
}

TEST(Model, AblationNames) {
  for (const auto& name : AblationConfig::names()) EXPECT_NO_THROW(AblationConfig::from_name(name).validate());
  EXPECT_EQ(AblationConfig::from_name("Ours"), AblationConfig{});
  const AblationConfig self = AblationConfig::from_name("Ours-SelfAtt");
  EXPECT_FALSE(self.use_self_attention);
  EXPECT_TRUE(self.use_context_attention);
  EXPECT_EQ(AblationConfig::from_name("Sup+Key").enabled_branches(), 2u);
  EXPECT_THROW(AblationConfig::from_name("Nope"), ArgumentError);
  AblationConfig none{false, false, false, true, true};
  EXPECT_THROW(none.validate(), ArgumentError);
}

TEST(Model, WithoutSelfAttentionEqualsZeroGate) {
  const ModelConfig cfg = toy::small_model();
  std::mt19937_64 rng(3);
  const DmqcaParams p = DmqcaParams::init(cfg, {}, 3);
  const Sample s = toy::random_sample(rng);
  EXPECT_EQ(forward(s, p, cfg, {}).value(), forward(s, p, cfg, AblationConfig::from_name("Ours-SelfAtt")).value());
}

TEST(Model, FiniteForLargeInputs) {
  const ModelConfig cfg = toy::small_model();
  std::mt19937_64 rng(4);
  const DmqcaParams p = DmqcaParams::init(cfg, {}, 4);
  Sample s;
  s.main_view = Tensor::uniform({4, 64, 64}, -1e3, 1e3, rng);
  s.support_view = Tensor::uniform({4, 64, 64}, -1e3, 1e3, rng);
  s.keyframe = Tensor::uniform({64, 64}, -1e3, 1e3, rng);
  const Tensor y = forward(s, p, cfg, {}).value();
  for (double v : y.values()) EXPECT_TRUE(std::isfinite(v));
}

TEST(Model, ShapeMismatchIsDimensionError) {
  const ModelConfig cfg = toy::small_model();
  std::mt19937_64 rng(5);
  const DmqcaParams p = DmqcaParams::init(cfg, {}, 5);
  Sample s = toy::random_sample(rng);
  s.main_view = Tensor({3, 64, 64});
  EXPECT_THROW(forward(s, p, cfg, {}), DimensionError);
}

TEST(Model, InputMap) {
  const ModelConfig cfg = ModelConfig::desk();
  const Tensor y = prepare_input(Tensor({3}, {0.85, 0.35, 1.0}), cfg);
  EXPECT_DOUBLE_EQ(y[0], 0.0);
  EXPECT_DOUBLE_EQ(y[1], 1.0);
  EXPECT_NEAR(y[2], -0.3, 1e-15);
}

TEST(Model, FingerprintDependsOnAblation) {
  const ModelConfig cfg = ModelConfig::desk();
  EXPECT_EQ(config_fingerprint(cfg, {}), config_fingerprint(cfg, {}));
  EXPECT_NE(config_fingerprint(cfg, {}), config_fingerprint(cfg, AblationConfig::from_name("Key")));
  EXPECT_NE(config_fingerprint(cfg, {}), config_fingerprint(ModelConfig::paper_scale(), {}));
}

TEST(Loss, PerfectPredictionIsZero) {
  const Var pred = Var::constant(Tensor({6}, {1, 2, 3, 4, 5, 6}));
  const Tensor label({6}, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(qca_loss(std::span(&pred, 1), std::span(&label, 1), {}, 0.0).value().item(), 0.0);
}

TEST(Loss, UnitErrorsGiveOne) {
  const Var pred = Var::constant(Tensor({6}, {2, 3, 4, 5, 6, 7}));
  const Tensor label({6}, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(qca_loss(std::span(&pred, 1), std::span(&label, 1), {}, 0.0).value().item(), 1.0);
}

TEST(Loss, WeightPenaltyClosedForm) {
  const Var pred = Var::constant(Tensor({6}, {2, 3, 4, 5, 6, 7}));
  const Tensor label({6}, {1, 2, 3, 4, 5, 6});
  ParameterList params{{"w", Var::parameter(Tensor({4, 5}, 1.0))},
                       {"b", Var::parameter(Tensor({4}, 3.0)), false}};
  EXPECT_NEAR(qca_loss(std::span(&pred, 1), std::span(&label, 1), params, 1e-6).value().item(),
              1.0 + 1e-6 * 20, 1e-15);
}

TEST(Loss, Errors) {
  const Var pred = Var::constant(Tensor({6}, {std::nan(""), 0, 0, 0, 0, 0}));
  const Tensor label({6});
  EXPECT_THROW(qca_loss(std::span(&pred, 1), std::span(&label, 1), {}, 0.0), NumericError);
  const Tensor short_label({5});
  EXPECT_THROW(qca_loss(std::span(&pred, 1), std::span(&short_label, 1), {}, 0.0), DimensionError);
}
