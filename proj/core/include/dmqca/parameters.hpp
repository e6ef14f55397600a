// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "dmqca/autodiff.hpp"

namespace dmqca {

struct NamedParameter {
  std::string name;
  Var var;
  /// Multiplicative weights enter the l2 penalty; biases and gates do not.
  bool regularized = true;
  /// Buffers are persisted but never updated by the optimizer.
  bool trainable = true;
};

using ParameterList = std::vector<NamedParameter>;

}  // namespace dmqca
