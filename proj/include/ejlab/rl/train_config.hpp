/*
 * Copyright 2026 The ejlab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <vector>

#include "ejlab/eisenstein.hpp"
#include "ejlab/error.hpp"
#include "ejlab/faults.hpp"
#include "ejlab/rl/env.hpp"
#include "ejlab/rl/policy.hpp"

namespace ejlab::rl {

/// Every knob of behaviour cloning + curriculum PPO.
struct TrainConfig {
  // PPO
  double gamma = 0.95;
  double gae_lambda = 0.92;
  double clip_epsilon = 0.2;
  double learning_rate = 1e-4;
  int episodes_per_density = 5000;
  std::vector<int> curriculum{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  int rollout_batch = 2048;
  int epochs_per_update = 4;
  int minibatch = 256;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  double gradient_clip_norm = 0.5;
  bool normalize_advantages = true;

  // environment
  RewardSpec reward{};
  FeatureEncoding encoding = FeatureEncoding::wrap_aware;
  std::vector<int> hidden{64, 64};
  std::vector<EisensteinInt> family{{2, 3}, {3, 4}, {4, 5}, {5, 6}};
  std::vector<FaultModel> fault_models{FaultModel::uniform, FaultModel::clustered, FaultModel::sector};

  // behaviour-cloning warm start
  bool behavior_clone = true;
  int bc_pairs = 10000;
  int bc_epochs = 20;
  double bc_learning_rate = 1e-3;

  std::uint64_t seed = 1;

  void validate() const {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ParameterError("gamma must lie in (0, 1]");
    if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) throw ParameterError("gae_lambda must lie in [0, 1]");
    if (!(clip_epsilon > 0.0)) throw ParameterError("clip_epsilon must be positive");
    if (!(learning_rate > 0.0) || !(bc_learning_rate > 0.0)) throw ParameterError("learning rates must be positive");
    if (episodes_per_density < 0 || rollout_batch <= 0 || epochs_per_update <= 0 || minibatch <= 0) {
      throw ParameterError("episode, batch and epoch counts must be positive");
    }
    if (!(gradient_clip_norm > 0.0)) throw ParameterError("gradient_clip_norm must be positive");
    if (family.empty()) throw ParameterError("training family is empty");
    if (fault_models.empty()) throw ParameterError("no fault models to train on");
    for (int c : curriculum) {
      if (c < 0) throw ParameterError("curriculum fault counts must be non-negative");
    }
    if (behavior_clone && (bc_pairs <= 0 || bc_epochs <= 0)) throw ParameterError("bc_pairs and bc_epochs must be positive");
    reward.validate();
  }
};

}  // namespace ejlab::rl
