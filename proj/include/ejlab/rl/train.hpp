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
#include <cstdio>
#include <cstdint>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ejlab/error.hpp"
#include "ejlab/faults.hpp"
#include "ejlab/random.hpp"
#include "ejlab/rl/env.hpp"
#include "ejlab/rl/gae.hpp"
#include "ejlab/rl/policy.hpp"
#include "ejlab/rl/ppo.hpp"
#include "ejlab/rl/router.hpp"
#include "ejlab/rl/train_config.hpp"
#include "ejlab/routing.hpp"
#include "ejlab/topology.hpp"

namespace ejlab::rl {

/// A training or cloning episode: a network, its faults and a live (src, dst) pair.
struct Scenario {
  const Topology* topo = nullptr;
  FaultSet faults;
  NodeId src = 0;
  NodeId dst = 0;
};

/// Draws a scenario: uniform topology from the family, uniform model from the list
/// (sector placement falls back to clustered when the sector is too small), then a
/// uniform ordered pair of distinct live nodes.
inline Scenario sample_scenario(std::span<const Topology> family, int fault_count,
                                const std::vector<FaultModel>& models, Rng& rng) {
  Scenario s;
  s.topo = &family[static_cast<std::size_t>(rng.below(family.size()))];
  const int n = s.topo->order();
  const int count = std::min(fault_count, n - 3);
  FaultSpec spec = FaultSpec::with_count(models[static_cast<std::size_t>(rng.below(models.size()))], count,
                                         rng.next_u64(), static_cast<int>(rng.below(kDirections)));
  if (spec.model == FaultModel::sector && count > n / 6) spec.model = FaultModel::clustered;
  s.faults = inject_faults(*s.topo, spec);
  const auto live = s.faults.live_nodes();
  const auto pair = rng.sample(live, 2);
  s.src = pair[0];
  s.dst = pair[1];
  return s;
}

inline std::vector<Topology> build_family(const std::vector<EisensteinInt>& alphas) {
  std::vector<Topology> out;
  out.reserve(alphas.size());
  for (const auto& a : alphas) out.push_back(Topology::build(a));
  return out;
}

// ---------------------------------------------------------------------------
// Behaviour cloning
// ---------------------------------------------------------------------------

/// State along an oracle path, the oracle's action there, and the discounted return
/// of following the oracle path from that state.
struct CloneSample {
  Features features{};
  int action = 0;
  double ret = 0.0;
};

/// Appends the (state, action, return) triples of one oracle route.
inline void append_oracle_path(const Topology& topo, const FaultSet& faults, const RouteResult& route,
                               const TrainConfig& config, std::vector<CloneSample>& out) {
  if (!route.delivered() || route.hops() == 0) return;
  const int hops = route.hops();
  std::vector<double> rewards(static_cast<std::size_t>(hops), config.reward.step);
  rewards.back() += config.reward.goal;
  double g = 0.0;
  std::vector<double> returns(rewards.size());
  for (std::size_t t = rewards.size(); t-- > 0;) returns[t] = g = rewards[t] + config.gamma * g;
  for (int t = 0; t < hops; ++t) {
    const NodeId u = route.path[static_cast<std::size_t>(t)];
    const NodeId v = route.path[static_cast<std::size_t>(t + 1)];
    const auto state = make_state(topo, faults, u, route.path.back(), config.encoding);
    out.push_back({state.features, topo.direction_to(u, v), returns[static_cast<std::size_t>(t)]});
  }
}

/// Walks Dijkstra routes over sampled scenarios until config.bc_pairs state-action
/// pairs are collected. Fault counts are drawn uniformly from the curriculum.
inline std::vector<CloneSample> collect_clone_samples(std::span<const Topology> family, const TrainConfig& config,
                                                      Rng& rng) {
  std::vector<CloneSample> out;
  const std::vector<int> counts = config.curriculum.empty() ? std::vector<int>{0} : config.curriculum;
  while (static_cast<int>(out.size()) < config.bc_pairs) {
    const int count = counts[static_cast<std::size_t>(rng.below(counts.size()))];
    const auto sc = sample_scenario(family, count, config.fault_models, rng);
    const auto route = dijkstra_route(*sc.topo, sc.faults, make_request(*sc.topo, sc.src, sc.dst));
    append_oracle_path(*sc.topo, sc.faults, route, config, out);
  }
  out.resize(static_cast<std::size_t>(config.bc_pairs));
  return out;
}

/// Mean actor cross-entropy against the oracle actions.
inline double clone_loss(const PolicyParams& p, std::span<const CloneSample> samples) {
  double loss = 0.0;
  for (const auto& s : samples) {
    auto z = p.actor.forward(s.features);
    log_softmax(z);
    loss -= z[static_cast<std::size_t>(s.action)];
  }
  return loss / static_cast<double>(samples.size());
}

struct CloneReport {
  std::vector<double> epoch_loss;  // full-sample cross-entropy after each epoch
  std::vector<double> epoch_value_loss;
};

/// Minimises actor cross-entropy and critic squared error on the samples with Adam
/// (bc_learning_rate, minibatch size config.minibatch, bc_epochs passes).
inline CloneReport fit_clone(PolicyParams& p, std::span<const CloneSample> samples, const TrainConfig& config,
                             Rng& rng) {
  if (samples.empty()) throw ParameterError("behaviour cloning needs at least one sample");
  CloneReport report;
  Adam opt(p.param_count(), config.bc_learning_rate);
  std::vector<double> flat = p.flat();
  std::vector<double> grad(flat.size());
  const std::size_t actor_n = p.actor.param_count();
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Mlp::Cache ac, cc;
  std::array<double, kActionCount> dz{};
  for (int epoch = 0; epoch < config.bc_epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.minibatch)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.minibatch));
      const double inv = 1.0 / static_cast<double>(end - start);
      std::fill(grad.begin(), grad.end(), 0.0);
      const std::span<double> ag = std::span<double>(grad).first(actor_n);
      const std::span<double> cg = std::span<double>(grad).subspan(actor_n);
      for (std::size_t i = start; i < end; ++i) {
        const auto& s = samples[order[i]];
        auto z = p.actor.forward(s.features, ac);
        log_softmax(z);
        for (int k = 0; k < kActionCount; ++k) {
          dz[static_cast<std::size_t>(k)] =
              inv * (std::exp(z[static_cast<std::size_t>(k)]) - (k == s.action ? 1.0 : 0.0));
        }
        p.actor.backward(ac, dz, ag);
        const double v = p.critic.forward(s.features, cc)[0];
        const double dv = inv * 2.0 * (v - s.ret);
        p.critic.backward(cc, std::span<const double>(&dv, 1), cg);
      }
      opt.step(flat, grad);
      p.assign_flat(flat);
    }
    report.epoch_loss.push_back(clone_loss(p, samples));
    double vl = 0.0;
    for (const auto& s : samples) {
      const double v = critic_forward(p, s.features);
      vl += (v - s.ret) * (v - s.ret);
    }
    report.epoch_value_loss.push_back(vl / static_cast<double>(samples.size()));
  }
  return report;
}

/// Fresh networks cloned from Dijkstra routes over the family.
inline PolicyParams behavior_clone(std::span<const Topology> family, const TrainConfig& config,
                                   CloneReport* report = nullptr) {
  config.validate();
  Rng init_rng(derive_seed(config.seed, {1}));
  Rng data_rng(derive_seed(config.seed, {2}));
  Rng fit_rng(derive_seed(config.seed, {3}));
  auto p = PolicyParams::initialized(init_rng, config.hidden, config.encoding);
  for (const auto& t : family) p.family.push_back(t.alpha());
  const auto samples = collect_clone_samples(family, config, data_rng);
  auto rep = fit_clone(p, samples, config, fit_rng);
  if (report) *report = std::move(rep);
  return p;
}

// ---------------------------------------------------------------------------
// Curriculum PPO
// ---------------------------------------------------------------------------

struct TrainingLogRow {
  int stage = 0;  // curriculum fault count
  int episode = 0;
  double ret = 0.0;
  bool delivered = false;
  int steps = 0;
  double loss_clip = 0.0;
  double loss_vf = 0.0;
  double entropy = 0.0;
};

struct TrainingResult {
  PolicyParams policy;
  std::vector<TrainingLogRow> log;
  CloneReport clone;
  int updates = 0;
};

/// Runs one sampled episode, appending its transitions to traj.
inline TrainingLogRow run_episode(const PolicyParams& policy, const Scenario& sc, const TrainConfig& config,
                                  Rng& rng, Trajectory& traj) {
  RoutingEnv env(*sc.topo, sc.faults, config.reward, config.encoding);
  RouteState state = env.reset(sc.src, sc.dst);
  TrainingLogRow row;
  while (true) {
    const auto probs = actor_forward(policy, state.features);
    const int action = select_action(policy, state, ActionSelection::sample, &rng);
    Transition tr;
    tr.features = state.features;
    tr.action = action;
    tr.value = critic_forward(policy, state.features);
    tr.log_prob = std::log(std::max(probs[static_cast<std::size_t>(action)], 1e-300));
    const auto step = env.step(action);
    tr.reward = step.reward;
    tr.done = step.done;
    traj.steps.push_back(tr);
    row.ret += step.reward;
    ++row.steps;
    state = step.next;
    if (step.done) {
      row.delivered = step.outcome == RouteStatus::delivered;
      return row;
    }
  }
}

/// Optional behaviour-cloning warm start, then for each curriculum fault count
/// episodes_per_density sampled episodes with a PPO update whenever at least
/// rollout_batch transitions are buffered (and once more at the end of the stage).
/// Deterministic in config.
inline TrainingResult train_curriculum(const TrainConfig& config) {
  config.validate();
  const auto family = build_family(config.family);
  TrainingResult result;
  if (config.behavior_clone) {
    result.policy = behavior_clone(family, config, &result.clone);
  } else {
    Rng init_rng(derive_seed(config.seed, {1}));
    result.policy = PolicyParams::initialized(init_rng, config.hidden, config.encoding);
    for (const auto& t : family) result.policy.family.push_back(t.alpha());
  }

  Adam optimizer(result.policy.param_count(), config.learning_rate);
  Rng update_rng(derive_seed(config.seed, {4}));
  LossReport last{};
  for (std::size_t stage = 0; stage < config.curriculum.size(); ++stage) {
    const int count = config.curriculum[stage];
    Rng rng(derive_seed(config.seed, {5, stage}));
    std::vector<Trajectory> buffer;
    std::size_t buffered = 0;
    auto update = [&] {
      auto batch = make_ppo_batch(buffer, config.gamma, config.gae_lambda);
      auto upd = ppo_update(std::move(batch), result.policy, config, optimizer, update_rng);
      result.policy = std::move(upd.params);
      last = upd.report;
      ++result.updates;
      buffer.clear();
      buffered = 0;
    };
    for (int ep = 0; ep < config.episodes_per_density; ++ep) {
      const auto sc = sample_scenario(family, count, config.fault_models, rng);
      Trajectory traj;
      auto row = run_episode(result.policy, sc, config, rng, traj);
      buffered += traj.size();
      buffer.push_back(std::move(traj));
      row.stage = count;
      row.episode = ep;
      if (buffered >= static_cast<std::size_t>(config.rollout_batch)) update();
      row.loss_clip = last.surrogate;
      row.loss_vf = last.value_loss;
      row.entropy = last.entropy;
      result.log.push_back(row);
    }
    if (buffered >= static_cast<std::size_t>(config.minibatch)) update();
  }
  return result;
}

inline void write_training_log(std::ostream& os, const std::vector<TrainingLogRow>& log,
                               const std::string& manifest_hash = {}) {
  if (!manifest_hash.empty()) os << "# manifest=" << manifest_hash << '\n';
  os << "stage,episode,return,delivered,steps,loss_clip,loss_vf,entropy\n";
  char buf[256];
  for (const auto& r : log) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.6f,%d,%d,%.6f,%.6f,%.6f\n", r.stage, r.episode, r.ret,
                  r.delivered ? 1 : 0, r.steps, r.loss_clip, r.loss_vf, r.entropy);
    os << buf;
  }
}

}  // namespace ejlab::rl
