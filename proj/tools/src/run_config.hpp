// SPDX-License-Identifier: Apache-2.0
//
// RunConfig: the JSON file read by every command. Every key is optional;
// missing keys keep the defaults listed in docs/config.md, unknown keys are
// rejected.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dmqca/errors.hpp"
#include "dmqca/model.hpp"
#include "dmqca/phantom.hpp"
#include "dmqca/train.hpp"

namespace dmqca::cli {

/// Unknown key, wrong type or out-of-range value in a config file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct DataSection {
  std::filesystem::path dir = "data";
  std::size_t n = 100;
  std::uint64_t seed = 11;
  std::string size = "desk";  // "desk" | "paper"
};

struct CrossvalSection {
  std::size_t folds = 10;
  std::uint64_t seed = 5;
  std::vector<std::string> methods{"Ours", "Key"};
  std::filesystem::path out = "crossval";
};

struct RunConfig {
  DataSection data;
  PhantomRanges phantom;
  ModelConfig model;
  TrainConfig train;
  AblationConfig ablation;
  std::string ablation_name = "Ours";
  CrossvalSection crossval;

  PhantomSize phantom_size() const;
  void validate() const;
};

PhantomSize size_from_name(const std::string& name);

/// Throws ConfigError.
RunConfig parse_run_config(const nlohmann::json& j);
/// Throws IoError when unreadable, ConfigError when malformed.
RunConfig load_run_config(const std::filesystem::path& path);
/// Defaults as JSON; round-trips through parse_run_config.
nlohmann::json to_json(const RunConfig& cfg);

}  // namespace dmqca::cli
