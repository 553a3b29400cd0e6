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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ejlab/error.hpp"
#include "ejlab/random.hpp"
#include "ejlab/topology.hpp"

namespace ejlab {

enum class FaultModel { uniform, clustered, sector };

inline std::string_view to_string(FaultModel m) {
  switch (m) {
    case FaultModel::uniform: return "uniform";
    case FaultModel::clustered: return "clustered";
    case FaultModel::sector: return "sector";
  }
  return "?";
}

inline FaultModel parse_fault_model(std::string_view s) {
  if (s == "uniform") return FaultModel::uniform;
  if (s == "clustered") return FaultModel::clustered;
  if (s == "sector") return FaultModel::sector;
  throw ParameterError("unknown fault model '" + std::string(s) + "'");
}

/// How to place faults. Exactly one of count / density is used; count wins if set.
struct FaultSpec {
  FaultModel model = FaultModel::uniform;
  std::optional<int> count;
  std::optional<double> density;  // fraction of N in [0, 0.4], rounded to nearest
  int sector_index = 0;           // sector model only
  std::uint64_t seed = 0;

  static FaultSpec with_count(FaultModel model, int count, std::uint64_t seed, int sector = 0) {
    FaultSpec s;
    s.model = model;
    s.count = count;
    s.seed = seed;
    s.sector_index = sector;
    return s;
  }

  int resolved_count(int order) const {
    if (count) return *count;
    if (density) {
      if (!(*density >= 0.0 && *density <= 0.4)) throw ParameterError("fault density must lie in [0, 0.4]");
      return static_cast<int>(std::lround(*density * order));
    }
    return 0;
  }
};

/// Permanently failed nodes plus the spec that produced them.
class FaultSet {
 public:
  FaultSet() = default;
  FaultSet(int order, std::vector<NodeId> faulty, FaultSpec spec)
      : spec_(spec), mask_(static_cast<std::size_t>(order), 0) {
    std::sort(faulty.begin(), faulty.end());
    faulty.erase(std::unique(faulty.begin(), faulty.end()), faulty.end());
    for (NodeId u : faulty) {
      if (u < 0 || u >= order) throw ParameterError("fault node id out of range");
      mask_[static_cast<std::size_t>(u)] = 1;
    }
    nodes_ = std::move(faulty);
  }

  /// No faults on a network of the given order.
  static FaultSet none(int order) { return FaultSet(order, {}, FaultSpec{}); }

  bool is_faulty(NodeId u) const { return mask_[static_cast<std::size_t>(u)] != 0; }
  bool is_live(NodeId u) const { return !is_faulty(u); }
  const std::vector<NodeId>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  int order() const { return static_cast<int>(mask_.size()); }
  const FaultSpec& spec() const { return spec_; }

  std::vector<NodeId> live_nodes() const {
    std::vector<NodeId> out;
    for (NodeId u = 0; u < order(); ++u) {
      if (!is_faulty(u)) out.push_back(u);
    }
    return out;
  }

 private:
  FaultSpec spec_;
  std::vector<NodeId> nodes_;
  std::vector<char> mask_;
};

/// Places faults according to spec. Deterministic in (topology, spec):
///  - uniform: partial Fisher-Yates over all node ids;
///  - clustered: a uniform non-centre seed, then repeatedly a uniform pick from the
///    ascending list of non-faulty, non-centre nodes adjacent to the cluster;
///  - sector: partial Fisher-Yates over the ascending members of one sector.
inline FaultSet inject_faults(const Topology& topo, const FaultSpec& spec) {
  const int n = topo.order();
  const int count = spec.resolved_count(n);
  if (count < 0) throw ParameterError("fault count must be non-negative");
  if (count >= n - 2) {
    std::ostringstream msg;
    msg << "fault count " << count << " leaves fewer than 3 live nodes on N=" << n;
    throw ParameterError(msg.str());
  }
  Rng rng(spec.seed);
  std::vector<NodeId> chosen;

  switch (spec.model) {
    case FaultModel::uniform: {
      std::vector<NodeId> all(static_cast<std::size_t>(n));
      std::iota(all.begin(), all.end(), 0);
      chosen = rng.sample(std::move(all), static_cast<std::size_t>(count));
      break;
    }
    case FaultModel::clustered: {
      if (count == 0) break;
      std::vector<char> in(static_cast<std::size_t>(n), 0);
      const auto seed_node = static_cast<NodeId>(1 + rng.below(static_cast<std::uint64_t>(n - 1)));
      chosen.push_back(seed_node);
      in[static_cast<std::size_t>(seed_node)] = 1;
      while (static_cast<int>(chosen.size()) < count) {
        std::set<NodeId> frontier;
        for (NodeId u : chosen) {
          for (NodeId v : topo.neighbors(u)) {
            if (v != 0 && !in[static_cast<std::size_t>(v)]) frontier.insert(v);
          }
        }
        const std::vector<NodeId> candidates(frontier.begin(), frontier.end());
        const NodeId next = rng.pick(candidates);
        chosen.push_back(next);
        in[static_cast<std::size_t>(next)] = 1;
      }
      break;
    }
    case FaultModel::sector: {
      if (spec.sector_index < 0 || spec.sector_index >= kDirections) {
        throw ParameterError("sector index must be in 0..5");
      }
      auto members = sector_decompose(topo).members(spec.sector_index);
      if (static_cast<std::size_t>(count) > members.size()) {
        std::ostringstream msg;
        msg << "sector " << spec.sector_index << " has " << members.size() << " nodes, cannot hold " << count
            << " faults";
        throw ParameterError(msg.str());
      }
      chosen = rng.sample(std::move(members), static_cast<std::size_t>(count));
      break;
    }
  }
  FaultSpec resolved = spec;
  resolved.count = count;
  return FaultSet(n, std::move(chosen), resolved);
}

/// Header "ej-faults v1 model=<m> count=<k> seed=<s>", then one node id per line.
inline void write_faults(std::ostream& os, const FaultSet& faults) {
  os << "ej-faults v1 model=" << to_string(faults.spec().model) << " count=" << faults.size()
     << " seed=" << faults.spec().seed << '\n';
  for (NodeId u : faults.nodes()) os << u << '\n';
}

inline FaultSet read_faults(std::istream& is, const Topology& topo) {
  std::string line;
  if (!std::getline(is, line)) throw FormatError("empty fault file");
  char model[32] = {};
  int count = 0;
  unsigned long long seed = 0;
  if (std::sscanf(line.c_str(), "ej-faults v1 model=%31s count=%d seed=%llu", model, &count, &seed) != 3) {
    throw FormatError("bad fault header: " + line);
  }
  FaultSpec spec = FaultSpec::with_count(parse_fault_model(model), count, seed);
  std::vector<NodeId> ids;
  NodeId u = 0;
  while (is >> u) {
    if (!topo.valid(u)) throw FormatError("fault node id " + std::to_string(u) + " out of range");
    ids.push_back(u);
  }
  if (static_cast<int>(ids.size()) != count) throw FormatError("fault file lists a different number of nodes than its header");
  return FaultSet(topo.order(), std::move(ids), spec);
}

}  // namespace ejlab
