// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "dmqca/checkpoint.hpp"
#include "dmqca/errors.hpp"
#include "tmpdir.hpp"
#include "toy.hpp"

using namespace dmqca;
using testing_support::TempDir;

TEST(Checkpoint, RoundTripIsBitwiseAtStoredPrecision) {
  TempDir dir;
  const ModelConfig cfg = toy::small_model();
  std::mt19937_64 rng(1);
  DmqcaParams p = DmqcaParams::init(cfg, {}, 1);
  p.output_bias.mutable_value()[2] = 3.14159265358979;
  save_checkpoint(p, cfg, {}, dir / "m.ckpt");
  const DmqcaParams loaded = load_checkpoint(dir / "m.ckpt", cfg, {});
  round_to_stored_precision(p);
  const ParameterList a = p.parameters(), b = loaded.parameters();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].name, b[i].name);
    EXPECT_EQ(a[i].var.value(), b[i].var.value()) << a[i].name;
  }
  const Sample s = toy::random_sample(rng);
  EXPECT_EQ(forward(s, p, cfg, {}).value(), forward(s, loaded, cfg, {}).value());
}

TEST(Checkpoint, TruncatedFileIsIntegrityError) {
  TempDir dir;
  const ModelConfig cfg = toy::small_model();
  save_checkpoint(DmqcaParams::init(cfg, {}, 2), cfg, {}, dir / "m.ckpt");
  const std::string bytes = testing_support::slurp(dir / "m.ckpt");
  testing_support::spit(dir / "cut.ckpt", bytes.substr(0, bytes.size() / 2));
  EXPECT_THROW(load_checkpoint(dir / "cut.ckpt", cfg, {}), IntegrityError);
  std::string flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x10;
  testing_support::spit(dir / "flip.ckpt", flipped);
  EXPECT_THROW(load_checkpoint(dir / "flip.ckpt", cfg, {}), IntegrityError);
}

TEST(Checkpoint, DifferentAblationIsFingerprintError) {
  TempDir dir;
  const ModelConfig cfg = toy::small_model();
  save_checkpoint(DmqcaParams::init(cfg, {}, 3), cfg, {}, dir / "m.ckpt");
  EXPECT_THROW(load_checkpoint(dir / "m.ckpt", cfg, AblationConfig::from_name("Main")), FingerprintError);
  ModelConfig other = cfg;
  other.hidden_units = 8;
  EXPECT_THROW(load_checkpoint(dir / "m.ckpt", other.resolved(), {}), FingerprintError);
}

TEST(Checkpoint, MissingFileIsIoError) {
  TempDir dir;
  EXPECT_THROW(load_checkpoint(dir / "absent.ckpt", toy::small_model(), {}), IoError);
  EXPECT_THROW(inspect_checkpoint(dir / "absent.ckpt"), IoError);
}

TEST(Checkpoint, KeyOnlyStoresKeyframeAndHead) {
  TempDir dir;
  const ModelConfig cfg = toy::small_model();
  const AblationConfig key = AblationConfig::from_name("Key");
  save_checkpoint(DmqcaParams::init(cfg, key, 4), cfg, key, dir / "k.ckpt");
  const CheckpointInfo info = inspect_checkpoint(dir / "k.ckpt");
  EXPECT_EQ(info.version, kCheckpointVersion);
  EXPECT_EQ(info.fingerprint, config_fingerprint(cfg, key));
  ASSERT_FALSE(info.names.empty());
  for (const auto& n : info.names)
    EXPECT_TRUE(n.starts_with("keyframe.") || n.starts_with("head.")) << n;
}
