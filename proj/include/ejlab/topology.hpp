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
#include <cstdio>
#include <array>
#include <cstdint>
#include <deque>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ejlab/eisenstein.hpp"
#include "ejlab/error.hpp"

namespace ejlab {

/// Dense node index 0..N-1. Node 0 is the residue class of 0.
using NodeId = std::int32_t;

inline constexpr NodeId kNoNode = -1;

/// Largest network order supported; the all-pairs distance table is N^2 bytes.
inline constexpr std::int64_t kMaxOrder = 4096;

/// Exact non-negative fraction in lowest terms.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational make(std::int64_t n, std::int64_t d) {
    if (d == 0) throw ParameterError("zero denominator");
    if (d < 0) n = -n, d = -d;
    const auto g = std::gcd(n, d);
    return g == 0 ? Rational{0, 1} : Rational{n / g, d / g};
  }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  friend bool operator==(const Rational&, const Rational&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.num << '/' << r.den; }

/// Sector labels produced by sector_decompose. Center is node 0.
struct SectorMap {
  static constexpr int kCenter = -1;

  std::vector<int> sector_of;  // 0..5, or kCenter
  std::vector<int> level_of;   // hop distance from node 0

  /// Node ids of one sector, ascending.
  std::vector<NodeId> members(int sector) const {
    std::vector<NodeId> out;
    for (std::size_t u = 0; u < sector_of.size(); ++u) {
      if (sector_of[u] == sector) out.push_back(static_cast<NodeId>(u));
    }
    return out;
  }
};

/// The Eisenstein-Jacobi network EJ_alpha: residues of Z[rho] mod alpha, each joined to
/// its six unit-direction neighbours. Immutable after construction.
class Topology {
 public:
  /// Builds EJ_alpha. Requires 0 < a <= b and 7 <= N(alpha) <= kMaxOrder.
  static Topology build(const EisensteinInt& alpha);

  const EisensteinInt& alpha() const { return alpha_; }
  int order() const { return static_cast<int>(reps_.size()); }
  /// Maximum BFS eccentricity; equals floor((a + 2b) / 3) on the supported domain.
  int diameter() const { return diameter_; }

  const EisensteinInt& representative(NodeId u) const { return reps_.at(static_cast<std::size_t>(u)); }
  const std::vector<EisensteinInt>& representatives() const { return reps_; }

  NodeId neighbor(NodeId u, int direction) const {
    return adjacency_[static_cast<std::size_t>(u)][static_cast<std::size_t>(direction)];
  }
  std::span<const NodeId, kDirections> neighbors(NodeId u) const {
    return std::span<const NodeId, kDirections>(adjacency_[static_cast<std::size_t>(u)]);
  }

  /// Direction index k with neighbor(u, k) == v, or -1 if not adjacent.
  int direction_to(NodeId u, NodeId v) const {
    const auto& row = adjacency_[static_cast<std::size_t>(u)];
    for (int k = 0; k < kDirections; ++k) {
      if (row[static_cast<std::size_t>(k)] == v) return k;
    }
    return -1;
  }

  /// Node whose residue class contains beta.
  NodeId canonical_residue(const EisensteinInt& beta) const {
    const auto it = index_.find(residue_key(beta));
    // Every key is present once construction has enumerated all N classes.
    return it->second;
  }

  /// Graph hop distance (all-pairs BFS table).
  int hop_distance(NodeId u, NodeId v) const {
    return distances_[static_cast<std::size_t>(u) * reps_.size() + static_cast<std::size_t>(v)];
  }

  /// Shortest-hop lattice displacement from u to v: the canonical representative of
  /// the class of rep(v) - rep(u). Its rho-taxicab length equals hop_distance(u, v).
  EisensteinInt min_displacement(NodeId u, NodeId v) const {
    return representative(canonical_residue(representative(v) - representative(u)));
  }

  bool valid(NodeId u) const { return u >= 0 && u < order(); }

 private:
  explicit Topology(const EisensteinInt& alpha) : alpha_(alpha) {}

  // beta ~ beta' (mod alpha) iff (beta - beta') * conj(alpha) has both coordinates
  // divisible by N(alpha), so the pair of remainders identifies the class.
  std::uint64_t residue_key(const EisensteinInt& beta) const {
    const auto p = eisenstein_multiply(beta, alpha_conj_);
    auto mod = [n = norm_](std::int64_t x) { return ((x % n) + n) % n; };
    return static_cast<std::uint64_t>(mod(p.a)) * static_cast<std::uint64_t>(norm_) +
           static_cast<std::uint64_t>(mod(p.b));
  }

  std::vector<int> bfs_levels(NodeId origin) const;

  EisensteinInt alpha_;
  EisensteinInt alpha_conj_;
  std::int64_t norm_ = 0;
  int diameter_ = 0;
  std::vector<EisensteinInt> reps_;
  std::vector<std::array<NodeId, kDirections>> adjacency_;
  std::unordered_map<std::uint64_t, NodeId> index_;
  std::vector<std::uint8_t> distances_;
};

inline std::vector<int> Topology::bfs_levels(NodeId origin) const {
  std::vector<int> level(reps_.size(), -1);
  std::deque<NodeId> queue{origin};
  level[static_cast<std::size_t>(origin)] = 0;
  while (!queue.empty()) {
    const NodeId u = queue.front();
    queue.pop_front();
    for (NodeId v : adjacency_[static_cast<std::size_t>(u)]) {
      if (level[static_cast<std::size_t>(v)] < 0) {
        level[static_cast<std::size_t>(v)] = level[static_cast<std::size_t>(u)] + 1;
        queue.push_back(v);
      }
    }
  }
  return level;
}

inline Topology Topology::build(const EisensteinInt& alpha) {
  if (alpha.a <= 0 || alpha.a > alpha.b) {
    std::ostringstream msg;
    msg << "generator " << alpha << " must satisfy 0 < a <= b";
    throw ParameterError(msg.str());
  }
  const auto norm = eisenstein_norm(alpha);
  if (norm < 7 || norm > kMaxOrder) {
    std::ostringstream msg;
    msg << "generator " << alpha << " has norm " << norm << ", supported range is [7, " << kMaxOrder << "]";
    throw ParameterError(msg.str());
  }

  Topology topo(alpha);
  topo.alpha_conj_ = conjugate(alpha);
  topo.norm_ = norm;
  const auto n = static_cast<std::size_t>(norm);
  topo.reps_.reserve(n);
  topo.index_.reserve(n);

  // First-touch BFS from 0 fixes both the node numbering and the representatives.
  topo.reps_.push_back({0, 0});
  topo.index_.emplace(topo.residue_key({0, 0}), 0);
  std::deque<NodeId> queue{0};
  while (!queue.empty() && topo.reps_.size() < n) {
    const NodeId u = queue.front();
    queue.pop_front();
    for (const auto& unit : kUnitDirections) {
      const auto p = topo.reps_[static_cast<std::size_t>(u)] + unit;
      const auto [it, inserted] = topo.index_.emplace(topo.residue_key(p), static_cast<NodeId>(topo.reps_.size()));
      if (inserted) {
        topo.reps_.push_back(p);
        queue.push_back(it->second);
      }
    }
  }

  topo.adjacency_.resize(n);
  for (std::size_t u = 0; u < n; ++u) {
    for (int k = 0; k < kDirections; ++k) {
      topo.adjacency_[u][static_cast<std::size_t>(k)] =
          topo.canonical_residue(topo.reps_[u] + kUnitDirections[static_cast<std::size_t>(k)]);
    }
  }

  topo.distances_.assign(n * n, 0);
  for (std::size_t u = 0; u < n; ++u) {
    const auto level = topo.bfs_levels(static_cast<NodeId>(u));
    for (std::size_t v = 0; v < n; ++v) {
      topo.distances_[u * n + v] = static_cast<std::uint8_t>(level[v]);
      topo.diameter_ = std::max(topo.diameter_, level[v]);
    }
  }
  return topo;
}

inline Topology build_topology(const EisensteinInt& alpha) { return Topology::build(alpha); }

/// floor((a + 2b) / 3), valid for 0 <= a <= b.
constexpr std::int64_t diameter_formula(const EisensteinInt& alpha) { return (alpha.a + 2 * alpha.b) / 3; }

/// Number of nodes at each hop distance from origin, indexed by distance.
inline std::vector<int> distance_distribution(const Topology& topo, NodeId origin) {
  std::vector<int> counts;
  for (NodeId v = 0; v < topo.order(); ++v) {
    const auto d = static_cast<std::size_t>(topo.hop_distance(origin, v));
    if (counts.size() <= d) counts.resize(d + 1, 0);
    ++counts[d];
  }
  return counts;
}

/// Splits the network into six wedges around node 0. Sector k is seeded with the
/// level-1 node in direction k; a node at level t joins the sector of a neighbour at
/// level t - 1. When its lower-level neighbours sit in two cyclically adjacent
/// directions {d, d+1}, the one in direction d+1 is used, so each wedge runs from
/// corner k up to (not including) corner k+1. Other tie patterns (only possible at
/// wrap-around levels when b != a + 1) take the lowest direction index.
inline SectorMap sector_decompose(const Topology& topo) {
  const auto n = static_cast<std::size_t>(topo.order());
  SectorMap map;
  map.sector_of.assign(n, SectorMap::kCenter);
  map.level_of.resize(n);
  int max_level = 0;
  for (std::size_t u = 0; u < n; ++u) {
    map.level_of[u] = topo.hop_distance(0, static_cast<NodeId>(u));
    max_level = std::max(max_level, map.level_of[u]);
  }
  for (int k = 0; k < kDirections; ++k) {
    map.sector_of[static_cast<std::size_t>(topo.neighbor(0, k))] = k;
  }
  for (int t = 2; t <= max_level; ++t) {
    for (std::size_t u = 0; u < n; ++u) {
      if (map.level_of[u] != t) continue;
      std::array<bool, kDirections> inner{};
      int count = 0;
      for (int k = 0; k < kDirections; ++k) {
        const auto v = static_cast<std::size_t>(topo.neighbor(static_cast<NodeId>(u), k));
        inner[static_cast<std::size_t>(k)] = map.level_of[v] == t - 1;
        count += inner[static_cast<std::size_t>(k)] ? 1 : 0;
      }
      int pick = -1;
      if (count == 2) {
        for (int k = 0; k < kDirections && pick < 0; ++k) {
          if (inner[static_cast<std::size_t>(k)] && inner[static_cast<std::size_t>((k + 1) % kDirections)]) {
            pick = (k + 1) % kDirections;
          }
        }
      }
      for (int k = 0; k < kDirections && pick < 0; ++k) {
        if (inner[static_cast<std::size_t>(k)]) pick = k;
      }
      const auto via = static_cast<std::size_t>(topo.neighbor(static_cast<NodeId>(u), pick));
      map.sector_of[u] = map.sector_of[via];
    }
  }
  return map;
}

/// Mean level of the 1 + 3L(L+1) nodes of a perfect hexagon of radius L:
/// sum_{i=1..L} 6 i^2 / (1 + 3L(L+1)).
inline Rational sector_avg_path_length(std::int64_t levels) {
  if (levels < 1) throw ParameterError("sector_avg_path_length needs L >= 1");
  const std::int64_t numerator = levels * (levels + 1) * (2 * levels + 1);  // 6 * sum i^2
  const std::int64_t total = 1 + 3 * levels * (levels + 1);
  return Rational::make(numerator, total);
}

/// Text adjacency dump: header "ej-topology v1 a=<a> b=<b> n=<N>", then one line per
/// node "node_id a b n0 n1 n2 n3 n4 n5".
inline void write_topology(std::ostream& os, const Topology& topo) {
  os << "ej-topology v1 a=" << topo.alpha().a << " b=" << topo.alpha().b << " n=" << topo.order() << '\n';
  for (NodeId u = 0; u < topo.order(); ++u) {
    const auto& rep = topo.representative(u);
    os << u << ' ' << rep.a << ' ' << rep.b;
    for (NodeId v : topo.neighbors(u)) os << ' ' << v;
    os << '\n';
  }
}

/// Parses a dump written by write_topology, rebuilds the network from its header and
/// checks that every line agrees with the rebuilt one.
inline Topology read_topology(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw FormatError("empty topology dump");
  std::int64_t a = 0, b = 0, n = 0;
  if (std::sscanf(line.c_str(), "ej-topology v1 a=%ld b=%ld n=%ld", &a, &b, &n) != 3) {
    throw FormatError("bad topology header: " + line);
  }
  auto topo = Topology::build({a, b});
  if (n != topo.order()) throw FormatError("topology header n does not match N(alpha)");
  for (NodeId u = 0; u < topo.order(); ++u) {
    if (!std::getline(is, line)) throw FormatError("truncated topology dump");
    std::istringstream row(line);
    NodeId id = 0;
    EisensteinInt rep;
    row >> id >> rep.a >> rep.b;
    bool ok = static_cast<bool>(row) && id == u && rep == topo.representative(u);
    for (int k = 0; ok && k < kDirections; ++k) {
      NodeId v = 0;
      ok = static_cast<bool>(row >> v) && v == topo.neighbor(u, k);
    }
    if (!ok) throw FormatError("topology dump line disagrees with rebuilt network: " + line);
  }
  return topo;
}

}  // namespace ejlab
