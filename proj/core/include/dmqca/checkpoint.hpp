// SPDX-License-Identifier: Apache-2.0
//
// Binary checkpoint layout (all integers little-endian):
//
//   "DMQC"                       4 bytes
//   format version               u32
//   config fingerprint           u64  (FNV-1a of canonical_config_text)
//   record count                 u32
//   per record:
//     name length, name bytes    u32, bytes
//     rank, extents              u32, u32 * rank
//     values                     f32 * numel
//   checksum                     u64  (FNV-1a of every preceding byte)

#pragma once

#include <cstdint>
#include <filesystem>

#include "dmqca/model.hpp"

namespace dmqca {

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const DmqcaParams& params, const ModelConfig& model,
                     const AblationConfig& ablation, const std::filesystem::path& path);

/// Throws IoError when unreadable, IntegrityError on truncation or a checksum
/// mismatch, FingerprintError when the file was written for a different
/// configuration or format version.
DmqcaParams load_checkpoint(const std::filesystem::path& path, const ModelConfig& model,
                            const AblationConfig& ablation);

struct CheckpointInfo {
  std::uint32_t version = 0;
  std::uint64_t fingerprint = 0;
  std::vector<std::string> names;
};

CheckpointInfo inspect_checkpoint(const std::filesystem::path& path);

/// Rounds every persisted tensor to 32-bit precision in place, matching
/// what a save/load round trip yields.
void round_to_stored_precision(DmqcaParams& params);

}  // namespace dmqca
