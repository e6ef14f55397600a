// SPDX-License-Identifier: Apache-2.0
//
// Central-difference checks of every differentiable operator, the encoders
// and the full model loss, each over a batch of random toy configurations.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dmqca {

struct GradSuiteOptions {
  std::size_t configurations = 20;
  double tolerance = 1e-4;
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  std::string name;
  std::size_t configurations = 0;
  double max_relative_error = 0.0;
  bool passed = false;
};

std::vector<std::string> gradcheck_suite_names();

/// Runs the named checks (all of them when `only` is empty). Throws
/// ArgumentError for an unknown name.
std::vector<GradCheckResult> run_gradcheck_suite(const GradSuiteOptions& options,
                                                 const std::vector<std::string>& only = {});

}  // namespace dmqca
