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

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "ejlab/faults.hpp"
#include "ejlab/random.hpp"
#include "ejlab/rl/env.hpp"
#include "ejlab/rl/gae.hpp"
#include "ejlab/rl/policy.hpp"
#include "ejlab/rl/ppo.hpp"
#include "ejlab/rl/router.hpp"
#include "oracles.hpp"

using namespace ejlab;
using namespace ejlab::rl;

namespace {

Trajectory random_trajectory(Rng& rng, std::size_t len) {
  Trajectory t;
  for (std::size_t i = 0; i < len; ++i) {
    Transition s;
    s.reward = rng.uniform(-60, 100);
    s.value = rng.uniform(-20, 20);
    s.done = rng.uniform() < 0.15 || i + 1 == len;
    t.steps.push_back(s);
  }
  return t;
}

Features random_features(Rng& rng) {
  Features f{};
  for (int i = 0; i < 4; ++i) f[static_cast<std::size_t>(i)] = rng.uniform(-1, 1);
  for (int i = 4; i < kFeatureCount; ++i) f[static_cast<std::size_t>(i)] = rng.uniform() < 0.8 ? 1.0 : 0.0;
  return f;
}

double log_prob(const PolicyParams& p, const Features& f, int a) {
  return std::log(actor_forward(p, f)[static_cast<std::size_t>(a)]);
}

/// Batch whose ratios sit away from the clip boundaries so the loss is smooth there.
std::vector<PpoSample> synthetic_batch(const PolicyParams& p, Rng& rng, std::size_t n, double eps) {
  std::vector<PpoSample> batch;
  while (batch.size() < n) {
    PpoSample s;
    s.features = random_features(rng);
    s.action = static_cast<int>(rng.below(kActionCount));
    const double shift = rng.uniform(-0.5, 0.5);
    const double ratio = std::exp(shift);
    if (std::abs(ratio - (1 + eps)) < 0.02 || std::abs(ratio - (1 - eps)) < 0.02) continue;
    s.old_log_prob = log_prob(p, s.features, s.action) - shift;
    s.advantage = rng.uniform(-2, 2);
    s.ret = rng.uniform(-10, 90);
    batch.push_back(s);
  }
  return batch;
}

/// Output-layer bias so the actor always prefers one direction.
void prefer_direction(PolicyParams& p, int k) {
  const auto& last = p.actor.layers().back();
  p.actor.params()[last.offset + static_cast<std::size_t>(k) * last.cols() + static_cast<std::size_t>(last.in)] = 5.0;
}

}  // namespace

TEST(Gae, SingleStep) {
  Trajectory t;
  t.steps.push_back({{}, 0, 7.5, 0.0, 0.0, true});
  EXPECT_DOUBLE_EQ(compute_gae(t, 0.95, 0.92).advantages[0], 7.5);
}

TEST(Gae, TwoStepHandValue) {
  Trajectory t;
  t.steps.push_back({{}, 0, -1.0, 0.0, 0.0, false});
  t.steps.push_back({{}, 0, 99.0, 0.0, 0.0, true});
  const auto g = compute_gae(t, 0.95, 0.92);
  EXPECT_NEAR(g.advantages[0], 85.526, 1e-12);
  EXPECT_NEAR(g.advantages[1], 99.0, 1e-12);
}

TEST(Gae, MatchesBruteForceDoubleSum) {
  Rng rng(2024);
  for (int i = 0; i < 100; ++i) {
    const auto t = random_trajectory(rng, 1 + rng.below(60));
    const double gamma = rng.uniform(0.5, 1.0), lambda = rng.uniform(0.0, 1.0);
    const auto got = compute_gae(t, gamma, lambda);
    const auto want = oracle::brute_force_gae(t, gamma, lambda);
    for (std::size_t k = 0; k < t.size(); ++k) {
      EXPECT_NEAR(got.advantages[k], want[k], 1e-10);
      EXPECT_NEAR(got.returns[k], want[k] + t.steps[k].value, 1e-10);
    }
  }
}

TEST(Gae, LambdaZeroIsTdError) {
  Rng rng(7);
  const auto t = random_trajectory(rng, 40);
  const auto g = compute_gae(t, 0.95, 0.0);
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double next_v = t.steps[k].done ? 0.0 : t.steps[k + 1].value;
    EXPECT_DOUBLE_EQ(g.advantages[k], t.steps[k].reward + 0.95 * next_v - t.steps[k].value);
  }
}

TEST(Gae, LambdaOneIsMonteCarloAdvantage) {
  Rng rng(8);
  for (int i = 0; i < 50; ++i) {
    const auto t = random_trajectory(rng, 30);
    const auto g = compute_gae(t, 0.95, 1.0);
    for (std::size_t k = 0; k < t.size(); ++k) {
      EXPECT_NEAR(g.advantages[k], oracle::discounted_return(t, k, 0.95) - t.steps[k].value, 1e-9);
    }
  }
}

TEST(Gae, EmptyRejected) { EXPECT_THROW(compute_gae(Trajectory{}, 0.9, 0.9), ParameterError); }

TEST(Networks, ZeroWeightsGiveUniformPolicyAndZeroValue) {
  const auto p = PolicyParams::zeros();
  Rng rng(1);
  const auto f = random_features(rng);
  for (double q : actor_forward(p, f)) EXPECT_DOUBLE_EQ(q, 1.0 / 6.0);
  EXPECT_DOUBLE_EQ(critic_forward(p, f), 0.0);
  EXPECT_NEAR(entropy(actor_forward(p, f)), std::log(6.0), 1e-15);
}

TEST(Networks, ProbabilitiesSumToOne) {
  Rng rng(99);
  for (int i = 0; i < 1000; ++i) {
    const auto p = PolicyParams::initialized(rng, {8, 8});
    const auto probs = actor_forward(p, random_features(rng));
    EXPECT_NEAR(std::accumulate(probs.begin(), probs.end(), 0.0), 1.0, 1e-6);
    for (double q : probs) EXPECT_GE(q, 0.0);
    EXPECT_LE(entropy(probs), std::log(6.0) + 1e-12);
  }
}

TEST(Networks, InitialisationScale) {
  Rng rng(3);
  const auto p = PolicyParams::initialized(rng);
  for (const auto& l : p.actor.layers()) {
    const double limit = std::sqrt(6.0 / (l.in + l.out));
    for (int o = 0; o < l.out; ++o) {
      for (int i = 0; i <= l.in; ++i) {
        const double w = p.actor.params()[l.offset + static_cast<std::size_t>(o) * l.cols() + static_cast<std::size_t>(i)];
        if (i == l.in) EXPECT_EQ(w, 0.0);
        else EXPECT_LE(std::abs(w), limit);
      }
    }
  }
}

TEST(Networks, DimensionMismatchRejected) {
  const auto p = PolicyParams::zeros();
  const std::vector<double> short_input(9, 0.0);
  EXPECT_THROW(p.actor.forward(short_input), ParameterError);
}

TEST(Ppo, ClipExamples) {
  EXPECT_EQ(clipped_surrogate_slope(1.5, 1.0, 0.2), 0.0);
  EXPECT_EQ(clipped_surrogate_slope(0.5, -1.0, 0.2), 0.0);
  EXPECT_EQ(clipped_surrogate_slope(1.5, -1.0, 0.2), -1.0);
  EXPECT_EQ(clipped_surrogate_slope(1.0, 2.0, 0.2), 2.0);

  Rng rng(4);
  const auto p = PolicyParams::initialized(rng, {8});
  PpoSample s;
  s.features = random_features(rng);
  s.action = 2;
  s.old_log_prob = log_prob(p, s.features, 2) - std::log(1.5);
  s.advantage = 2.0;
  const auto rep = ppo_loss(p, std::span<const PpoSample>(&s, 1), {0.2, 0.0, 0.0});
  EXPECT_NEAR(rep.surrogate, 1.2 * 2.0, 1e-12);
  EXPECT_DOUBLE_EQ(rep.clip_fraction, 1.0);
}

TEST(Ppo, GradientMatchesFiniteDifferences) {
  Rng rng(5);
  auto p = PolicyParams::initialized(rng, {16, 16});
  const PpoCoefficients coef{0.2, 0.5, 0.01};
  const auto batch = synthetic_batch(p, rng, 5, coef.clip_epsilon);
  std::vector<double> grad(p.param_count());
  ppo_loss(p, batch, coef, grad);

  auto flat = p.flat();
  std::vector<double> numeric(flat.size());
  const double h = 1e-5;
  for (std::size_t i = 0; i < flat.size(); ++i) {
    const double keep = flat[i];
    flat[i] = keep + h;
    p.assign_flat(flat);
    const double up = ppo_loss(p, batch, coef).total;
    flat[i] = keep - h;
    p.assign_flat(flat);
    const double down = ppo_loss(p, batch, coef).total;
    flat[i] = keep;
    numeric[i] = (up - down) / (2 * h);
  }
  p.assign_flat(flat);
  double diff = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < flat.size(); ++i) {
    diff += (grad[i] - numeric[i]) * (grad[i] - numeric[i]);
    norm += numeric[i] * numeric[i];
    EXPECT_NEAR(grad[i], numeric[i], 1e-4 * std::max(1.0, std::abs(numeric[i]))) << "parameter " << i;
  }
  EXPECT_LT(std::sqrt(diff / norm), 1e-4);
}

TEST(Ppo, ValueLossGradientMatchesFiniteDifferences) {
  Rng rng(6);
  auto p = PolicyParams::initialized(rng, {16, 16});
  const PpoCoefficients coef{0.2, 1.0, 0.0};
  auto batch = synthetic_batch(p, rng, 5, coef.clip_epsilon);
  for (auto& s : batch) s.advantage = 0.0;  // isolates the value term
  std::vector<double> grad(p.param_count());
  ppo_loss(p, batch, coef, grad);
  auto flat = p.flat();
  const std::size_t actor_n = p.actor.param_count();
  double diff = 0.0, norm = 0.0;
  for (std::size_t i = actor_n; i < flat.size(); ++i) {
    const double keep = flat[i];
    flat[i] = keep + 1e-5;
    p.assign_flat(flat);
    const double up = ppo_loss(p, batch, coef).value_loss;
    flat[i] = keep - 1e-5;
    p.assign_flat(flat);
    const double down = ppo_loss(p, batch, coef).value_loss;
    flat[i] = keep;
    const double numeric = (up - down) / 2e-5;
    diff += (grad[i] - numeric) * (grad[i] - numeric);
    norm += numeric * numeric;
  }
  EXPECT_LT(std::sqrt(diff / norm), 1e-4);
  for (std::size_t i = 0; i < actor_n; ++i) EXPECT_EQ(grad[i], 0.0);
}

TEST(Ppo, ClippedSamplesContributeExactlyZeroGradient) {
  Rng rng(7);
  const auto p = PolicyParams::initialized(rng, {16});
  const PpoCoefficients coef{0.2, 0.5, 0.0};
  for (const auto& [log_ratio, adv] : {std::pair{0.5, 1.3}, std::pair{-0.5, -0.7}}) {
    PpoSample s;
    s.features = random_features(rng);
    s.action = 4;
    s.old_log_prob = log_prob(p, s.features, 4) - log_ratio;
    s.advantage = adv;
    s.ret = 3.0;
    std::vector<double> grad(p.param_count());
    ppo_loss(p, std::span<const PpoSample>(&s, 1), coef, grad);
    for (std::size_t i = 0; i < p.actor.param_count(); ++i) ASSERT_EQ(grad[i], 0.0);
  }
}

TEST(Ppo, UnitRatioGivesVanillaPolicyGradient) {
  Rng rng(8);
  auto p = PolicyParams::initialized(rng, {16});
  PpoSample s;
  s.features = random_features(rng);
  s.action = 1;
  s.old_log_prob = log_prob(p, s.features, 1);
  s.advantage = 1.7;
  std::vector<double> grad(p.param_count());
  ppo_loss(p, std::span<const PpoSample>(&s, 1), {0.2, 0.0, 0.0}, grad);
  auto flat = p.flat();
  for (std::size_t i = 0; i < p.actor.param_count(); ++i) {
    const double keep = flat[i];
    flat[i] = keep + 1e-6;
    p.assign_flat(flat);
    const double up = log_prob(p, s.features, 1);
    flat[i] = keep - 1e-6;
    p.assign_flat(flat);
    const double down = log_prob(p, s.features, 1);
    flat[i] = keep;
    EXPECT_NEAR(grad[i], -s.advantage * (up - down) / 2e-6, 1e-6);
  }
}

TEST(Ppo, GradNormClipping) {
  std::vector<double> g{3.0, 4.0};
  EXPECT_DOUBLE_EQ(clip_grad_norm(g, 1.0), 5.0);
  EXPECT_NEAR(g[0], 0.6, 1e-15);
  EXPECT_NEAR(g[1], 0.8, 1e-15);
  std::vector<double> small{0.1, 0.0};
  clip_grad_norm(small, 1.0);
  EXPECT_EQ(small[0], 0.1);
}

TEST(Ppo, AdamFirstStepIsSignTimesRate) {
  Adam opt(3, 0.01);
  std::vector<double> x{1.0, 1.0, 1.0};
  const std::vector<double> g{2.0, -0.5, 1e-3};
  opt.step(x, g);
  EXPECT_NEAR(x[0], 0.99, 1e-9);
  EXPECT_NEAR(x[1], 1.01, 1e-9);
  EXPECT_NEAR(x[2], 0.99, 1e-7);
}

TEST(Ppo, UpdateReducesLossAndIsTransactional) {
  Rng rng(9);
  const auto p = PolicyParams::initialized(rng, {16, 16});
  TrainConfig cfg;
  cfg.learning_rate = 1e-3;
  cfg.minibatch = 16;
  auto batch = synthetic_batch(p, rng, 64, cfg.clip_epsilon);
  for (auto& s : batch) s.old_log_prob = log_prob(p, s.features, s.action);
  Adam opt(p.param_count(), cfg.learning_rate);
  Rng shuffle(1);
  const auto before = ppo_loss(p, batch, {cfg.clip_epsilon, cfg.value_coef, 0.0});
  const auto upd = ppo_update(batch, p, cfg, opt, shuffle);
  EXPECT_LT(ppo_loss(upd.params, batch, {cfg.clip_epsilon, cfg.value_coef, 0.0}).value_loss, before.value_loss);

  auto poisoned = batch;
  poisoned[3].ret = std::nan("");
  const auto snapshot = p.flat();
  EXPECT_THROW(ppo_update(poisoned, p, cfg, opt, shuffle), TrainingError);
  EXPECT_EQ(p.flat(), snapshot);
}

TEST(Env, RewardsAndTermination) {
  const auto topo = Topology::build({3, 4});
  const NodeId dst = topo.neighbor(0, 1);
  const NodeId dead = topo.neighbor(0, 3);
  const FaultSet faults(topo.order(), {dead}, FaultSpec{});
  const RewardSpec reward;
  const auto s = make_state(topo, faults, 0, dst);
  const auto goal = env_step(topo, faults, s, 1, reward, 1, 12);
  EXPECT_EQ(goal.reward, 99.0);
  EXPECT_TRUE(goal.done);
  const auto crash = env_step(topo, faults, s, 3, reward, 1, 12);
  EXPECT_EQ(crash.reward, -51.0);
  EXPECT_TRUE(crash.done);
  EXPECT_EQ(crash.outcome, RouteStatus::dropped_fault_entry);
  const auto move = env_step(topo, faults, s, 0, reward, 1, 12);
  EXPECT_EQ(move.reward, -1.0);
  EXPECT_FALSE(move.done);
  EXPECT_EQ(move.next.current, topo.neighbor(0, 0));
  const auto out_of_budget = env_step(topo, faults, s, 0, reward, 12, 12);
  EXPECT_EQ(out_of_budget.reward, -1.0);
  EXPECT_TRUE(out_of_budget.done);
  EXPECT_EQ(out_of_budget.outcome, RouteStatus::dropped_budget);
  EXPECT_THROW(env_step(topo, faults, s, 6, reward, 1, 12), ParameterError);
  EXPECT_THROW((RewardSpec{100, -50, 1}.validate()), ParameterError);
}

TEST(Env, FeatureEncoding) {
  const auto topo = Topology::build({5, 6});
  const NodeId cur = topo.canonical_residue({2, 1});
  const NodeId dst = topo.canonical_residue({5, -5});
  const FaultSet faults(topo.order(), {topo.neighbor(cur, 2)}, FaultSpec{});
  const auto s = make_state(topo, faults, cur, dst);
  const auto disp = topo.min_displacement(cur, dst);
  EXPECT_DOUBLE_EQ(s.features[0], disp.a / 5.0);
  EXPECT_DOUBLE_EQ(s.features[1], disp.b / 5.0);
  EXPECT_DOUBLE_EQ(s.features[2], topo.representative(cur).a / 11.0);
  EXPECT_DOUBLE_EQ(s.features[3], topo.representative(cur).b / 11.0);
  const Features mask{0, 0, 0, 0, 1, 1, 0, 1, 1, 1};
  for (int k = 4; k < 10; ++k) EXPECT_EQ(s.features[static_cast<std::size_t>(k)], mask[static_cast<std::size_t>(k)]);
  EXPECT_FALSE(s.liveness[2]);
  const auto raw = make_state(topo, faults, cur, dst, FeatureEncoding::raw);
  const auto straight = topo.representative(dst) - topo.representative(cur);
  EXPECT_DOUBLE_EQ(raw.features[0], straight.a / 5.0);
  EXPECT_DOUBLE_EQ(raw.features[1], straight.b / 5.0);
}

TEST(RlRoute, TrivialAndGuardCases) {
  const auto topo = Topology::build({3, 4});
  const auto none = FaultSet::none(topo.order());
  auto p = PolicyParams::zeros({8});
  EXPECT_EQ(rl_route(topo, none, p, make_request(topo, 4, 4)).hops(), 0);

  prefer_direction(p, 0);
  // straight line along +1 from 0 never meets rho
  const NodeId off_line = topo.canonical_residue({0, 1});
  const auto loop = rl_route(topo, none, p, make_request(topo, 0, off_line));
  EXPECT_EQ(loop.status, RouteStatus::dropped_budget);
  EXPECT_LE(loop.hops(), default_hop_budget(topo));

  const FaultSet wall(topo.order(), {topo.neighbor(0, 0)}, FaultSpec{});
  const auto crash = rl_route(topo, wall, p, make_request(topo, 0, off_line));
  EXPECT_EQ(crash.status, RouteStatus::dropped_fault_entry);
  EXPECT_EQ(crash.path, (std::vector<NodeId>{0}));

  auto broken = PolicyParams::zeros({8});
  broken.actor = Mlp({9, 8, 6});
  EXPECT_THROW(rl_route(topo, none, broken, make_request(topo, 0, 1)), ParameterError);
}

TEST(RlRoute, MaskedModeAvoidsDeadNeighbours) {
  const auto topo = Topology::build({3, 4});
  auto p = PolicyParams::zeros({8});
  prefer_direction(p, 0);
  const FaultSet wall(topo.order(), {topo.neighbor(0, 0)}, FaultSpec{});
  const auto s = make_state(topo, wall, 0, 5);
  EXPECT_EQ(select_action(p, s, ActionSelection::argmax), 0);
  EXPECT_NE(select_action(p, s, ActionSelection::masked_argmax), 0);
  EXPECT_THROW(select_action(p, s, ActionSelection::sample), ParameterError);
}
