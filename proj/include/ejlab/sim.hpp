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
#include <bit>
#include <cmath>
#include <cstdint>
#include <deque>
#include <charconv>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ejlab/engine.hpp"
#include "ejlab/error.hpp"
#include "ejlab/faults.hpp"
#include "ejlab/parallel.hpp"
#include "ejlab/random.hpp"
#include "ejlab/routing.hpp"
#include "ejlab/topology.hpp"

namespace ejlab {

// ---------------------------------------------------------------------------
// Metrics

inline double compute_pdr(std::span<const RouteResult> results) {
  if (results.empty()) throw ParameterError("pdr of an empty result list");
  const auto delivered = std::count_if(results.begin(), results.end(), [](const auto& r) { return r.delivered(); });
  return static_cast<double>(delivered) / static_cast<double>(results.size());
}

/// All routing attempts made for one (src, dst) pair.
struct PairOutcome {
  NodeId src = kNoNode;
  NodeId dst = kNoNode;
  std::vector<RouteResult> attempts;
};

/// Fraction of routing instances that delivered; a pair counts as one instance and
/// succeeds if any of its attempts delivered.
inline double compute_err(std::span<const PairOutcome> pairs) {
  if (pairs.empty()) throw ParameterError("err of an empty pair list");
  std::size_t ok = 0;
  for (const auto& p : pairs) {
    if (std::any_of(p.attempts.begin(), p.attempts.end(), [](const auto& r) { return r.delivered(); })) ++ok;
  }
  return static_cast<double>(ok) / static_cast<double>(pairs.size());
}

/// Mean hops, with failed routes counted at the penalty value.
inline double compute_avg_distance(std::span<const RouteResult> results, int penalty) {
  if (penalty <= 0) throw ParameterError("penalty must be positive");
  if (results.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& r : results) sum += r.delivered() ? r.hops() : penalty;
  return sum / static_cast<double>(results.size());
}

inline int default_penalty(const Topology& topo) { return 4 * topo.diameter(); }

struct TrialMetrics {
  int trial = 0;
  int pairs = 0;
  double pdr = 0.0;
  double err = 0.0;
  double avg_distance = 0.0;
};

struct MetricsReport {
  int fault_count = 0;
  double pdr = 0.0;
  double err = 0.0;
  double avg_distance = 0.0;
  std::optional<double> normalized_throughput;  // set by traffic runs only
  int trials = 0;
  std::vector<TrialMetrics> per_trial;
};

// ---------------------------------------------------------------------------
// Reachability sweep

struct ReachabilityConfig {
  FaultModel fault_model = FaultModel::uniform;
  std::vector<int> fault_counts{0};
  int trials = 20;
  int pairs = 200;
  int penalty = 0;  // 0: 4 * diameter
  std::uint64_t seed = 0;

  void validate() const {
    if (fault_counts.empty()) throw ParameterError("no fault counts given");
    for (int k : fault_counts) {
      if (k < 0) throw ParameterError("fault counts must be non-negative");
    }
    if (trials <= 0) throw ParameterError("trials must be positive");
    if (pairs <= 0) throw ParameterError("pairs must be positive");
    if (penalty < 0) throw ParameterError("penalty must be non-negative");
  }
};

/// Fault set of one sweep trial. Depends only on (seed, model, count, trial), so every
/// engine evaluated with the same config sees the same instances. The sector model
/// rotates through the six sectors by trial.
inline FaultSet sweep_fault_set(const Topology& topo, const ReachabilityConfig& cfg, int count, int trial) {
  const auto seed = derive_seed(cfg.seed, {1, static_cast<std::uint64_t>(cfg.fault_model),
                                           static_cast<std::uint64_t>(count), static_cast<std::uint64_t>(trial)});
  return inject_faults(topo, FaultSpec::with_count(cfg.fault_model, count, seed, trial % kDirections));
}

/// Ordered (src, dst) pairs of distinct live nodes, sampled with replacement.
inline std::vector<std::pair<NodeId, NodeId>> sample_pairs(const FaultSet& faults, int pairs, std::uint64_t seed) {
  const auto live = faults.live_nodes();
  if (live.size() < 2) throw ParameterError("fewer than two live nodes");
  Rng rng(seed);
  std::vector<std::pair<NodeId, NodeId>> out;
  out.reserve(static_cast<std::size_t>(pairs));
  for (int i = 0; i < pairs; ++i) {
    const auto s = rng.below(live.size());
    auto d = rng.below(live.size() - 1);
    if (d >= s) ++d;
    out.emplace_back(live[s], live[d]);
  }
  return out;
}

struct TrialOutcome {
  FaultSet faults;
  std::vector<PairOutcome> pairs;
  TrialMetrics metrics;
};

inline TrialOutcome run_reachability_trial(const Topology& topo, const Engine& engine, const ReachabilityConfig& cfg,
                                           int count, int trial) {
  TrialOutcome out;
  out.faults = sweep_fault_set(topo, cfg, count, trial);
  const auto pair_seed = derive_seed(cfg.seed, {2, static_cast<std::uint64_t>(cfg.fault_model),
                                                static_cast<std::uint64_t>(count), static_cast<std::uint64_t>(trial)});
  std::vector<RouteResult> results;
  for (const auto& [s, d] : sample_pairs(out.faults, cfg.pairs, pair_seed)) {
    auto r = engine.route(topo, out.faults, make_request(topo, s, d));
    results.push_back(r);
    out.pairs.push_back({s, d, {std::move(r)}});
  }
  const int penalty = cfg.penalty > 0 ? cfg.penalty : default_penalty(topo);
  out.metrics = {trial, cfg.pairs, compute_pdr(results), compute_err(out.pairs),
                 compute_avg_distance(results, penalty)};
  return out;
}

/// One report per fault count, averaging trials. Trials run in parallel; the result
/// does not depend on the worker count.
inline std::vector<MetricsReport> run_reachability_sweep(const Topology& topo, const Engine& engine,
                                                         const ReachabilityConfig& cfg) {
  cfg.validate();
  const std::size_t trials = static_cast<std::size_t>(cfg.trials);
  std::vector<TrialMetrics> slots(cfg.fault_counts.size() * trials);
  parallel_for(slots.size(), [&](std::size_t i) {
    slots[i] = run_reachability_trial(topo, engine, cfg, cfg.fault_counts[i / trials], static_cast<int>(i % trials))
                   .metrics;
  });
  std::vector<MetricsReport> reports;
  for (std::size_t c = 0; c < cfg.fault_counts.size(); ++c) {
    MetricsReport rep;
    rep.fault_count = cfg.fault_counts[c];
    rep.trials = cfg.trials;
    rep.per_trial.assign(slots.begin() + static_cast<std::ptrdiff_t>(c * trials),
                         slots.begin() + static_cast<std::ptrdiff_t>((c + 1) * trials));
    for (const auto& t : rep.per_trial) {
      rep.pdr += t.pdr;
      rep.err += t.err;
      rep.avg_distance += t.avg_distance;
    }
    rep.pdr /= cfg.trials;
    rep.err /= cfg.trials;
    rep.avg_distance /= cfg.trials;
    reports.push_back(std::move(rep));
  }
  return reports;
}

// ---------------------------------------------------------------------------
// Queued traffic model

struct TrafficConfig {
  std::vector<double> loads{0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08};
  int cycles = 2000;
  int seeds = 20;
  int buffer = 8;
  int ttl = 0;                // 0: 4 * diameter
  double decay_length = 0.0;  // 0: diameter
  std::uint64_t seed = 0;

  void validate() const {
    if (loads.empty()) throw ParameterError("no loads given");
    for (double l : loads) {
      if (!(l > 0.0 && l <= 1.0)) throw ParameterError("loads must lie in (0, 1]");
    }
    if (cycles <= 0) throw ParameterError("cycles must be positive");
    if (seeds <= 0) throw ParameterError("seeds must be positive");
    if (buffer <= 0) throw ParameterError("buffer must be positive");
    if (ttl < 0) throw ParameterError("ttl must be non-negative");
    if (!(decay_length >= 0.0)) throw ParameterError("decay length must be non-negative");
  }
};

/// Throughput credit for a packet delivered in h hops whose fault-free distance is h0.
inline double detour_weight(int hops, int baseline, double decay_length) {
  return std::exp(-std::max(0, hops - baseline) / decay_length);
}

struct TrafficResult {
  std::int64_t injected = 0;
  std::int64_t delivered = 0;
  double credit = 0.0;

  double normalized() const { return injected == 0 ? 0.0 : credit / static_cast<double>(injected); }
};

/// Discrete-cycle simulation. Each cycle: every live node (ascending id) injects with
/// probability load a packet to a uniform other live node, dropped if its own FIFO is
/// full; then every live node forwards the head of its FIFO one hop, and the moved
/// packets are appended to their next FIFO in sender order, dropped on overflow. A
/// packet is dropped when the engine gives up or its hop count reaches the TTL
/// without arriving. Packets still queued at the end count as undelivered.
inline TrafficResult simulate_traffic(const Topology& topo, const Engine& engine, const FaultSet& faults, double load,
                                      const TrafficConfig& cfg, std::uint64_t seed) {
  struct Packet {
    NodeId dst;
    int hops;
    int baseline;
  };
  const int ttl = cfg.ttl > 0 ? cfg.ttl : 4 * topo.diameter();
  const double decay = cfg.decay_length > 0.0 ? cfg.decay_length : topo.diameter();
  const auto live = faults.live_nodes();
  if (live.size() < 2) throw ParameterError("fewer than two live nodes");
  const auto buffer = static_cast<std::size_t>(cfg.buffer);

  ForwardingContext ctx(topo, faults);
  Rng rng(seed);
  std::vector<std::deque<Packet>> queues(static_cast<std::size_t>(topo.order()));
  std::vector<std::pair<NodeId, Packet>> moving;
  TrafficResult out;

  for (int cycle = 0; cycle < cfg.cycles; ++cycle) {
    for (std::size_t i = 0; i < live.size(); ++i) {
      if (!(rng.uniform() < load)) continue;
      auto d = rng.below(live.size() - 1);
      if (d >= i) ++d;
      ++out.injected;
      auto& q = queues[static_cast<std::size_t>(live[i])];
      if (q.size() < buffer) q.push_back({live[d], 0, topo.hop_distance(live[i], live[d])});
    }
    moving.clear();
    for (NodeId u : live) {
      auto& q = queues[static_cast<std::size_t>(u)];
      if (q.empty()) continue;
      Packet p = q.front();
      q.pop_front();
      const auto hop = engine.next_hop(ctx, u, p.dst);
      if (hop.next == kNoNode) continue;
      ++p.hops;
      if (hop.next == p.dst) {
        ++out.delivered;
        out.credit += detour_weight(p.hops, p.baseline, decay);
      } else if (p.hops < ttl) {
        moving.emplace_back(hop.next, p);
      }
    }
    for (const auto& [v, p] : moving) {
      auto& q = queues[static_cast<std::size_t>(v)];
      if (q.size() < buffer) q.push_back(p);
    }
  }
  return out;
}

struct ThroughputPoint {
  double load = 0.0;
  std::vector<TrafficResult> runs;

  double mean() const {
    double s = 0.0;
    for (const auto& r : runs) s += r.normalized();
    return runs.empty() ? 0.0 : s / static_cast<double>(runs.size());
  }

  /// Standard error of the mean over runs.
  double stderr_of_mean() const {
    if (runs.size() < 2) return 0.0;
    const double m = mean();
    double ss = 0.0;
    for (const auto& r : runs) ss += (r.normalized() - m) * (r.normalized() - m);
    return std::sqrt(ss / static_cast<double>(runs.size() - 1) / static_cast<double>(runs.size()));
  }
};

/// Seed of run `run` at a given load: independent of the engine, so engines compared
/// under one config see identical traffic draws up to the point their routes differ.
inline std::uint64_t traffic_seed(std::uint64_t master, double load, int run) {
  return derive_seed(master, {3, std::bit_cast<std::uint64_t>(load), static_cast<std::uint64_t>(run)});
}

inline std::vector<ThroughputPoint> run_throughput_sweep(const Topology& topo, const Engine& engine,
                                                         const FaultSet& faults, const TrafficConfig& cfg) {
  cfg.validate();
  const std::size_t runs = static_cast<std::size_t>(cfg.seeds);
  std::vector<TrafficResult> slots(cfg.loads.size() * runs);
  parallel_for(slots.size(), [&](std::size_t i) {
    const double load = cfg.loads[i / runs];
    slots[i] = simulate_traffic(topo, engine, faults, load, cfg, traffic_seed(cfg.seed, load, static_cast<int>(i % runs)));
  });
  std::vector<ThroughputPoint> points;
  for (std::size_t l = 0; l < cfg.loads.size(); ++l) {
    points.push_back({cfg.loads[l], {slots.begin() + static_cast<std::ptrdiff_t>(l * runs),
                                     slots.begin() + static_cast<std::ptrdiff_t>((l + 1) * runs)}});
  }
  return points;
}

// ---------------------------------------------------------------------------
// CSV output

inline constexpr const char* kReachabilityHeader =
    "engine,alpha_a,alpha_b,fault_model,fault_count,trial,pairs,pdr,err,avg_distance";
inline constexpr const char* kThroughputHeader =
    "engine,alpha_a,alpha_b,fault_model,fault_count,load,trial,injected,delivered,normalized_throughput";

namespace detail {
/// Shortest text that reads back as the same double.
inline std::string fmt_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline void csv_preamble(std::ostream& os, const std::string& manifest_hash, const char* header, bool with_header) {
  if (!with_header) return;
  if (!manifest_hash.empty()) os << "# manifest=" << manifest_hash << '\n';
  os << header << '\n';
}
}  // namespace detail

inline void write_reachability_csv(std::ostream& os, std::string_view engine, const EisensteinInt& alpha,
                                   FaultModel model, std::span<const MetricsReport> reports,
                                   const std::string& manifest_hash, bool with_header = true) {
  detail::csv_preamble(os, manifest_hash, kReachabilityHeader, with_header);
  for (const auto& rep : reports) {
    for (const auto& t : rep.per_trial) {
      os << engine << ',' << alpha.a << ',' << alpha.b << ',' << to_string(model) << ',' << rep.fault_count << ','
         << t.trial << ',' << t.pairs << ',' << detail::fmt_double(t.pdr) << ',' << detail::fmt_double(t.err) << ','
         << detail::fmt_double(t.avg_distance) << '\n';
    }
  }
}

inline void write_throughput_csv(std::ostream& os, std::string_view engine, const EisensteinInt& alpha,
                                 const FaultSet& faults, std::span<const ThroughputPoint> points,
                                 const std::string& manifest_hash, bool with_header = true) {
  detail::csv_preamble(os, manifest_hash, kThroughputHeader, with_header);
  for (const auto& p : points) {
    for (std::size_t t = 0; t < p.runs.size(); ++t) {
      const auto& r = p.runs[t];
      os << engine << ',' << alpha.a << ',' << alpha.b << ',' << to_string(faults.spec().model) << ','
         << faults.size() << ',' << detail::fmt_double(p.load) << ',' << t << ',' << r.injected << ',' << r.delivered << ','
         << detail::fmt_double(r.normalized()) << '\n';
    }
  }
}

}  // namespace ejlab
