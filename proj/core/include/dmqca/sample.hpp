// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <string>

#include "dmqca/tensor.hpp"

namespace dmqca {

inline constexpr std::size_t kNumIndices = 6;

/// Index order used everywhere labels or predictions appear.
inline constexpr std::array<const char*, kNumIndices> kIndexNames{"RVD1", "RVD2", "RVD",
                                                                  "MLD",  "LL1",  "LL2"};

using IndexVector = std::array<double, kNumIndices>;

struct Sample {
  std::string id;
  Tensor main_view;     // [T, H, W]
  Tensor support_view;  // [T, H, W]
  Tensor keyframe;      // [H, W]
  Tensor label;         // [6], millimetres

  IndexVector label_array() const;
};

}  // namespace dmqca
