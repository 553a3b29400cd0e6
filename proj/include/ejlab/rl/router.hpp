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

#include "ejlab/faults.hpp"
#include "ejlab/random.hpp"
#include "ejlab/rl/policy.hpp"
#include "ejlab/routing.hpp"
#include "ejlab/topology.hpp"

namespace ejlab::rl {

enum class ActionSelection {
  argmax,         // deterministic evaluation
  sample,         // draw from pi(.|s); needs an Rng
  masked_argmax,  // argmax over live neighbours only (diagnostics)
};

inline int select_action(const PolicyParams& policy, const RouteState& state, ActionSelection mode,
                         Rng* rng = nullptr) {
  const auto probs = actor_forward(policy, state.features);
  switch (mode) {
    case ActionSelection::argmax: return argmax(probs);
    case ActionSelection::sample: {
      if (rng == nullptr) throw ParameterError("sampling mode needs a random generator");
      double u = rng->uniform();
      for (int k = 0; k < kActionCount; ++k) {
        u -= probs[static_cast<std::size_t>(k)];
        if (u < 0.0) return k;
      }
      return kActionCount - 1;
    }
    case ActionSelection::masked_argmax: {
      int best = -1;
      for (int k = 0; k < kActionCount; ++k) {
        if (!state.liveness[static_cast<std::size_t>(k)]) continue;
        if (best < 0 || probs[static_cast<std::size_t>(k)] > probs[static_cast<std::size_t>(best)]) best = k;
      }
      return best < 0 ? argmax(probs) : best;
    }
  }
  return argmax(probs);
}

/// Routes with the learned policy. Entering a faulty node drops the packet
/// (dropped_fault_entry, the faulty node is not added to path); exceeding the hop
/// budget or arriving at any node for the third time drops it as dropped_budget.
inline RouteResult rl_route(const Topology& topo, const FaultSet& faults, const PolicyParams& policy,
                            const RouteRequest& req, ActionSelection mode = ActionSelection::argmax,
                            Rng* rng = nullptr) {
  policy.check_dimensions();
  RouteResult result;
  result.path.push_back(req.src);
  std::vector<int> visits(static_cast<std::size_t>(topo.order()), 0);
  visits[static_cast<std::size_t>(req.src)] = 1;
  NodeId cur = req.src;
  while (cur != req.dst) {
    if (result.hops() >= req.hop_budget) {
      result.status = RouteStatus::dropped_budget;
      return result;
    }
    const auto state = make_state(topo, faults, cur, req.dst, policy.encoding);
    const NodeId next = topo.neighbor(cur, select_action(policy, state, mode, rng));
    if (faults.is_faulty(next)) {
      result.status = RouteStatus::dropped_fault_entry;
      return result;
    }
    cur = next;
    result.path.push_back(cur);
    if (++visits[static_cast<std::size_t>(cur)] >= 3) {
      result.status = RouteStatus::dropped_budget;
      return result;
    }
  }
  result.status = RouteStatus::delivered;
  return result;
}

}  // namespace ejlab::rl
