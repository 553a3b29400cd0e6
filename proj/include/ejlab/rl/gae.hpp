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

#include <vector>

#include "ejlab/error.hpp"
#include "ejlab/rl/policy.hpp"

namespace ejlab::rl {

/// One environment transition as recorded during collection.
struct Transition {
  Features features{};
  int action = 0;
  double reward = 0.0;
  double value = 0.0;     // V(s_t) at collection time
  double log_prob = 0.0;  // log pi_old(a_t | s_t)
  bool done = false;
};

/// Consecutive transitions; may hold several episodes back to back, each closed by done.
struct Trajectory {
  std::vector<Transition> steps;

  std::size_t size() const { return steps.size(); }
  bool empty() const { return steps.empty(); }
};

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;  // advantage + value, the critic's regression target
};

/// delta_t = r_t + gamma V(s_{t+1}) - V(s_t),  A_t = sum_l (gamma lambda)^l delta_{t+l},
/// both truncated at episode ends (V = 0 past a done step). A trailing step without
/// done is bootstrapped with bootstrap_value.
inline GaeResult compute_gae(const Trajectory& traj, double gamma, double lambda, double bootstrap_value = 0.0) {
  if (traj.empty()) throw ParameterError("compute_gae needs a non-empty trajectory");
  const std::size_t n = traj.size();
  GaeResult out;
  out.advantages.resize(n);
  out.returns.resize(n);
  double next_value = bootstrap_value;
  double next_adv = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    const auto& s = traj.steps[t];
    if (s.done) {
      next_value = 0.0;
      next_adv = 0.0;
    }
    const double delta = s.reward + gamma * next_value - s.value;
    const double adv = delta + gamma * lambda * next_adv;
    out.advantages[t] = adv;
    out.returns[t] = adv + s.value;
    next_value = s.value;
    next_adv = adv;
  }
  return out;
}

}  // namespace ejlab::rl
