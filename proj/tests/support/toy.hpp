// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <random>
#include <string>

#include "dmqca/model.hpp"

namespace dmqca::toy {

inline ModelConfig small_model() {
  ModelConfig cfg = ModelConfig::desk();
  cfg.view.filters = {2, 3, 4, 4, 5};
  cfg.view.kernels = {Triple{3, 3, 3}, Triple{1, 3, 3}, Triple{3, 1, 3}, Triple{3, 3, 3}, Triple{1, 1, 1}};
  cfg.view.attention_dim = 3;
  cfg.keyframe.widths = {2, 2, 3, 3, 4, 4};
  cfg.hidden_units = 7;
  return cfg.resolved();
}

inline Sample random_sample(std::mt19937_64& rng, std::string id = "s") {
  Sample s;
  s.id = std::move(id);
  s.main_view = Tensor::uniform({4, 64, 64}, 0, 1, rng);
  s.support_view = Tensor::uniform({4, 64, 64}, 0, 1, rng);
  s.keyframe = Tensor::uniform({64, 64}, 0, 1, rng);
  s.label = Tensor::uniform({6}, 1, 5, rng);
  return s;
}

}  // namespace dmqca::toy
