// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "dmqca/autodiff.hpp"

namespace dmqca {

struct GradCheckOptions {
  double epsilon = 1e-5;
  /// Check at most this many entries (chosen uniformly without replacement);
  /// nullopt checks every entry.
  std::optional<std::size_t> max_entries;
  std::uint64_t seed = 0;
  /// Entries whose error exceeds `retry_above` are re-measured with each of
  /// these steps and keep the smallest error (steps that straddle a kink of
  /// leaky ReLU, max-pool or abs give a wrong central difference).
  std::vector<double> retry_epsilons;
  double retry_above = 0.0;
};

/// Compares the reverse-mode gradient of `f` at `x` with central differences
/// and returns max_i |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
/// `f` must build its graph from the Var it is handed.
double finite_diff_check(const std::function<Var(const Var&)>& f, const Tensor& x,
                         const GradCheckOptions& options = {});

/// Same comparison for a parameter already embedded in a larger graph:
/// `loss` re-evaluates the scalar objective using the current value of
/// `param`, which is perturbed in place and restored afterwards.
double finite_diff_check_param(const std::function<Var()>& loss, Var& param,
                               const GradCheckOptions& options = {});

}  // namespace dmqca
