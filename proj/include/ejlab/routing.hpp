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

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <queue>
#include <string_view>
#include <utility>
#include <vector>

#include "ejlab/faults.hpp"
#include "ejlab/topology.hpp"

namespace ejlab {

enum class RouteStatus {
  delivered,
  dropped_local_minimum,
  dropped_budget,
  dropped_fault_entry,
  disconnected,
};

inline std::string_view to_string(RouteStatus s) {
  switch (s) {
    case RouteStatus::delivered: return "delivered";
    case RouteStatus::dropped_local_minimum: return "dropped_local_minimum";
    case RouteStatus::dropped_budget: return "dropped_budget";
    case RouteStatus::dropped_fault_entry: return "dropped_fault_entry";
    case RouteStatus::disconnected: return "disconnected";
  }
  return "?";
}

struct RouteRequest {
  NodeId src = 0;
  NodeId dst = 0;
  int hop_budget = 0;
};

/// Per-packet outcome. path starts at src and holds only live nodes that were
/// actually occupied; it ends at dst iff delivered.
struct RouteResult {
  RouteStatus status = RouteStatus::disconnected;
  std::vector<NodeId> path;

  bool delivered() const { return status == RouteStatus::delivered; }
  int hops() const { return static_cast<int>(path.size()) - 1; }
};

/// Default TTL for every engine: four network diameters.
inline int default_hop_budget(const Topology& topo) { return 4 * topo.diameter(); }

inline RouteRequest make_request(const Topology& topo, NodeId src, NodeId dst) {
  return {src, dst, default_hop_budget(topo)};
}

/// Distance metric the greedy router minimises.
enum class GreedyMetric {
  hop,            // wrap-aware hop distance (default)
  raw_euclidean,  // |z_next - z_dst| between canonical representatives, not wrap-aware
};

/// Greedy forwarding choice at cur: the live neighbour with the smallest remaining
/// distance among those strictly closer to dst than cur (ties: lowest direction
/// index), or kNoNode at a local minimum.
inline NodeId greedy_next_hop(const Topology& topo, const FaultSet& faults, NodeId cur, NodeId dst,
                              GreedyMetric metric = GreedyMetric::hop) {
  auto distance = [&](NodeId u) -> double {
    if (metric == GreedyMetric::hop) return topo.hop_distance(u, dst);
    const auto p = to_plane(topo.representative(u));
    const auto q = to_plane(topo.representative(dst));
    return std::hypot(p.x - q.x, p.y - q.y);
  };
  NodeId best = kNoNode;
  double best_d = distance(cur);
  for (NodeId v : topo.neighbors(cur)) {
    if (faults.is_faulty(v)) continue;
    const double d = distance(v);
    if (d < best_d) best = v, best_d = d;
  }
  return best;
}

/// Distance-greedy routing. Drops with dropped_local_minimum when no live neighbour is
/// strictly closer to the destination.
inline RouteResult greedy_route(const Topology& topo, const FaultSet& faults, const RouteRequest& req,
                                GreedyMetric metric = GreedyMetric::hop) {
  RouteResult result;
  result.path.push_back(req.src);
  NodeId cur = req.src;
  while (cur != req.dst) {
    if (result.hops() >= req.hop_budget) {
      result.status = RouteStatus::dropped_budget;
      return result;
    }
    cur = greedy_next_hop(topo, faults, cur, req.dst, metric);
    if (cur == kNoNode) {
      result.status = RouteStatus::dropped_local_minimum;
      return result;
    }
    result.path.push_back(cur);
  }
  result.status = RouteStatus::delivered;
  return result;
}

/// Hop distances to dst over the live subgraph (kUnreachable where none exists),
/// computed by Dijkstra with unit edge weights.
class ShortestPathField {
 public:
  static constexpr int kUnreachable = std::numeric_limits<int>::max();

  ShortestPathField(const Topology& topo, const FaultSet& faults, NodeId dst)
      : dst_(dst), dist_(static_cast<std::size_t>(topo.order()), kUnreachable) {
    if (faults.is_faulty(dst)) return;
    using Entry = std::pair<int, NodeId>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> frontier;
    dist_[static_cast<std::size_t>(dst)] = 0;
    frontier.emplace(0, dst);
    while (!frontier.empty()) {
      const auto [d, u] = frontier.top();
      frontier.pop();
      if (d > dist_[static_cast<std::size_t>(u)]) continue;
      for (NodeId v : topo.neighbors(u)) {
        if (faults.is_faulty(v)) continue;
        if (d + 1 < dist_[static_cast<std::size_t>(v)]) {
          dist_[static_cast<std::size_t>(v)] = d + 1;
          frontier.emplace(d + 1, v);
        }
      }
    }
  }

  NodeId destination() const { return dst_; }
  int distance(NodeId u) const { return dist_[static_cast<std::size_t>(u)]; }
  bool reachable(NodeId u) const { return distance(u) != kUnreachable; }

  /// Lowest-direction neighbour one hop closer to the destination, or kNoNode.
  NodeId next_hop(const Topology& topo, NodeId u) const {
    const int d = distance(u);
    if (d == kUnreachable || d == 0) return kNoNode;
    for (NodeId v : topo.neighbors(u)) {
      if (distance(v) == d - 1) return v;
    }
    return kNoNode;
  }

 private:
  NodeId dst_;
  std::vector<int> dist_;
};

/// Globally shortest live path. Among shortest paths the one taking the lowest
/// direction index at every step is returned.
inline RouteResult dijkstra_route(const Topology& topo, const FaultSet& faults, const RouteRequest& req) {
  const ShortestPathField field(topo, faults, req.dst);
  RouteResult result;
  result.path.push_back(req.src);
  if (!field.reachable(req.src)) {
    result.status = RouteStatus::disconnected;
    return result;
  }
  NodeId cur = req.src;
  while (cur != req.dst) {
    if (result.hops() >= req.hop_budget) {
      result.status = RouteStatus::dropped_budget;
      return result;
    }
    cur = field.next_hop(topo, cur);
    result.path.push_back(cur);
  }
  result.status = RouteStatus::delivered;
  return result;
}

}  // namespace ejlab
