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

#include "ejlab/error.hpp"
#include "ejlab/faults.hpp"
#include "ejlab/rl/policy.hpp"
#include "ejlab/routing.hpp"
#include "ejlab/topology.hpp"

namespace ejlab::rl {

/// Per-transition rewards. Reaching dst pays goal + step, entering a faulty node pays
/// fault + step, any other hop pays step.
struct RewardSpec {
  double goal = 100.0;
  double fault = -50.0;
  double step = -1.0;

  void validate() const {
    if (!(goal > 0.0 && 0.0 > step && step > fault)) {
      throw ParameterError("rewards must satisfy goal > 0 > step > fault");
    }
  }
};

struct StepResult {
  RouteState next;
  double reward = 0.0;
  bool done = false;
  /// Meaningful only when done.
  RouteStatus outcome = RouteStatus::delivered;
};

/// One deterministic transition. hops_after is the hop count once this move is made;
/// reaching hop_budget without arriving ends the episode with the step cost only.
inline StepResult env_step(const Topology& topo, const FaultSet& faults, const RouteState& state, int action,
                           const RewardSpec& reward, int hops_after, int hop_budget,
                           FeatureEncoding encoding = FeatureEncoding::wrap_aware) {
  if (action < 0 || action >= kActionCount) throw ParameterError("action must be in 0..5");
  const NodeId target = topo.neighbor(state.current, action);
  StepResult r;
  if (faults.is_faulty(target)) {
    r.next = state;
    r.reward = reward.fault + reward.step;
    r.done = true;
    r.outcome = RouteStatus::dropped_fault_entry;
    return r;
  }
  r.next = make_state(topo, faults, target, state.dst, encoding);
  if (target == state.dst) {
    r.reward = reward.goal + reward.step;
    r.done = true;
    r.outcome = RouteStatus::delivered;
    return r;
  }
  r.reward = reward.step;
  if (hops_after >= hop_budget) {
    r.done = true;
    r.outcome = RouteStatus::dropped_budget;
  }
  return r;
}

/// Episode wrapper around env_step for one (topology, fault set).
class RoutingEnv {
 public:
  RoutingEnv(const Topology& topo, const FaultSet& faults, RewardSpec reward = {},
             FeatureEncoding encoding = FeatureEncoding::wrap_aware)
      : topo_(&topo), faults_(&faults), reward_(reward), encoding_(encoding), budget_(default_hop_budget(topo)) {}

  const RouteState& reset(NodeId src, NodeId dst) {
    state_ = make_state(*topo_, *faults_, src, dst, encoding_);
    hops_ = 0;
    return state_;
  }

  StepResult step(int action) {
    ++hops_;
    auto r = env_step(*topo_, *faults_, state_, action, reward_, hops_, budget_, encoding_);
    state_ = r.next;
    return r;
  }

  const RouteState& state() const { return state_; }
  int hops() const { return hops_; }
  int hop_budget() const { return budget_; }

 private:
  const Topology* topo_;
  const FaultSet* faults_;
  RewardSpec reward_;
  FeatureEncoding encoding_;
  int budget_;
  RouteState state_;
  int hops_ = 0;
};

}  // namespace ejlab::rl
