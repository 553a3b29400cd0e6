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

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ejlab/error.hpp"
#include "ejlab/faults.hpp"
#include "ejlab/rl/policy.hpp"
#include "ejlab/rl/router.hpp"
#include "ejlab/routing.hpp"
#include "ejlab/topology.hpp"

namespace ejlab {

enum class EngineKind { greedy, dijkstra, rl };

inline std::string_view to_string(EngineKind k) {
  switch (k) {
    case EngineKind::greedy: return "greedy";
    case EngineKind::dijkstra: return "dijkstra";
    case EngineKind::rl: return "rl";
  }
  return "?";
}

inline EngineKind parse_engine(std::string_view s) {
  if (s == "greedy") return EngineKind::greedy;
  if (s == "dijkstra") return EngineKind::dijkstra;
  if (s == "rl") return EngineKind::rl;
  throw ParameterError("unknown engine '" + std::string(s) + "'");
}

/// Lazily built shortest-path fields for one (topology, fault set), shared by every
/// Dijkstra forwarding decision of a simulation. Not thread-safe.
class ForwardingContext {
 public:
  ForwardingContext(const Topology& topo, const FaultSet& faults)
      : topo_(&topo), faults_(&faults), fields_(static_cast<std::size_t>(topo.order())) {}

  const Topology& topology() const { return *topo_; }
  const FaultSet& faults() const { return *faults_; }

  const ShortestPathField& field(NodeId dst) {
    auto& slot = fields_[static_cast<std::size_t>(dst)];
    if (!slot) slot.emplace(*topo_, *faults_, dst);
    return *slot;
  }

 private:
  const Topology* topo_;
  const FaultSet* faults_;
  std::vector<std::optional<ShortestPathField>> fields_;
};

/// A forwarding decision: the next node, or kNoNode plus the reason the packet dies.
struct HopDecision {
  NodeId next = kNoNode;
  RouteStatus drop = RouteStatus::delivered;
};

/// One of the three routing engines behind a common interface.
class Engine {
 public:
  static Engine greedy(GreedyMetric metric = GreedyMetric::hop) {
    Engine e(EngineKind::greedy);
    e.metric_ = metric;
    return e;
  }
  static Engine dijkstra() { return Engine(EngineKind::dijkstra); }
  static Engine rl(std::shared_ptr<const rl::PolicyParams> policy) {
    if (!policy) throw ParameterError("the rl engine needs a policy");
    policy->check_dimensions();
    Engine e(EngineKind::rl);
    e.policy_ = std::move(policy);
    return e;
  }

  EngineKind kind() const { return kind_; }
  std::string_view name() const { return to_string(kind_); }
  const rl::PolicyParams* policy() const { return policy_.get(); }

  RouteResult route(const Topology& topo, const FaultSet& faults, const RouteRequest& req) const {
    switch (kind_) {
      case EngineKind::greedy: return greedy_route(topo, faults, req, metric_);
      case EngineKind::dijkstra: return dijkstra_route(topo, faults, req);
      case EngineKind::rl: return rl::rl_route(topo, faults, *policy_, req);
    }
    return {};
  }

  /// Per-hop decision used by the queued simulator (stateless per packet).
  HopDecision next_hop(ForwardingContext& ctx, NodeId cur, NodeId dst) const {
    const auto& topo = ctx.topology();
    switch (kind_) {
      case EngineKind::greedy: {
        const NodeId v = greedy_next_hop(topo, ctx.faults(), cur, dst, metric_);
        return v == kNoNode ? HopDecision{kNoNode, RouteStatus::dropped_local_minimum} : HopDecision{v};
      }
      case EngineKind::dijkstra: {
        const NodeId v = ctx.field(dst).next_hop(topo, cur);
        return v == kNoNode ? HopDecision{kNoNode, RouteStatus::disconnected} : HopDecision{v};
      }
      case EngineKind::rl: {
        const auto state = rl::make_state(topo, ctx.faults(), cur, dst, policy_->encoding);
        const NodeId v = topo.neighbor(cur, rl::select_action(*policy_, state, rl::ActionSelection::argmax));
        return ctx.faults().is_faulty(v) ? HopDecision{kNoNode, RouteStatus::dropped_fault_entry} : HopDecision{v};
      }
    }
    return {};
  }

 private:
  explicit Engine(EngineKind kind) : kind_(kind) {}

  EngineKind kind_;
  GreedyMetric metric_ = GreedyMetric::hop;
  std::shared_ptr<const rl::PolicyParams> policy_;
};

}  // namespace ejlab
