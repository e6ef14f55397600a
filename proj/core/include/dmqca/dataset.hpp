// SPDX-License-Identifier: Apache-2.0
//
// On-disk phantom dataset:
//
//   <dir>/manifest.json
//   <dir>/<id>_main.dmqf, <id>_support.dmqf, <id>_key.dmqf
//
// A .dmqf file is "DMQF", then T, H, W as little-endian u32, then T*H*W
// little-endian f32 pixels in row-major order. Keyframes are stored with T=1.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dmqca/phantom.hpp"

namespace dmqca {

inline constexpr int kManifestSchemaVersion = 1;

struct ManifestEntry {
  std::string id;
  StenosisSpec spec;
  IndexVector label{};
  std::string main_file;
  std::string support_file;
  std::string keyframe_file;
};

struct Manifest {
  int schema_version = kManifestSchemaVersion;
  std::uint64_t seed = 0;
  PhantomSize size;
  PhantomRanges ranges;
  std::vector<ManifestEntry> samples;
};

void write_frames(const std::filesystem::path& path, const Tensor& frames);
/// Returns [T, H, W]. Throws IoError / IntegrityError.
Tensor read_frames(const std::filesystem::path& path);

void write_manifest(const std::filesystem::path& path, const Manifest& manifest);
Manifest read_manifest(const std::filesystem::path& path);

/// Generates n samples with per-sample seeds sample_seed(seed, i) and writes
/// them plus manifest.json into out_dir (created if missing).
Manifest generate_dataset(std::size_t n, std::uint64_t seed, const PhantomRanges& ranges,
                          const PhantomSize& size, const std::filesystem::path& out_dir);

struct Dataset {
  Manifest manifest;
  std::vector<Sample> samples;
};

Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace dmqca
