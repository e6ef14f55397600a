// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dmqca::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitUsage = 2,
  kExitIo = 3,
  kExitNumeric = 4,
};

struct GenerateArgs {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::filesystem::path out;
  std::string size = "desk";
  std::optional<std::filesystem::path> config;
};

struct TrainArgs {
  std::optional<std::filesystem::path> config;
  std::optional<std::string> ablation;
  std::filesystem::path out;
  std::optional<std::filesystem::path> data;
  /// Per-epoch loss CSV; defaults to <out>.loss.csv.
  std::optional<std::filesystem::path> log;
};

struct EvalArgs {
  std::optional<std::filesystem::path> config;
  std::optional<std::string> ablation;
  std::optional<std::filesystem::path> ckpt;
  std::filesystem::path data;
  std::string predictor = "model";  // "model" | "oracle"
  std::filesystem::path out = "eval";
};

struct CrossvalArgs {
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> out;
};

struct GradcheckArgs {
  std::uint64_t seed = 0;
  std::size_t configurations = 20;
  std::vector<std::string> only;
};

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

int cmd_generate(const GenerateArgs& args, Streams io);
int cmd_train(const TrainArgs& args, Streams io);
int cmd_eval(const EvalArgs& args, Streams io);
int cmd_crossval(const CrossvalArgs& args, Streams io);
int cmd_gradcheck(const GradcheckArgs& args, Streams io);

/// Runs `body`, mapping library exceptions to exit codes and printing the
/// message to io.err.
int guarded(const std::function<int()>& body, Streams io);

/// Parses argv and dispatches; the CLI entry point.
int run(int argc, char** argv, Streams io);

}  // namespace dmqca::cli
