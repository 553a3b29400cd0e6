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
#include <numeric>
#include <sstream>
#include <span>
#include <vector>

#include "ejlab/error.hpp"
#include "ejlab/random.hpp"
#include "ejlab/rl/gae.hpp"
#include "ejlab/rl/policy.hpp"
#include "ejlab/rl/train_config.hpp"

namespace ejlab::rl {

/// One row of a PPO batch.
struct PpoSample {
  Features features{};
  int action = 0;
  double old_log_prob = 0.0;
  double advantage = 0.0;
  double ret = 0.0;  // value target
};

struct PpoCoefficients {
  double clip_epsilon = 0.2;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
};

/// Minibatch means. total = -surrogate + value_coef * value_loss - entropy_coef * entropy.
struct LossReport {
  double surrogate = 0.0;      // clipped objective L^CLIP (maximised)
  double value_loss = 0.0;     // L^VF (minimised)
  double entropy = 0.0;
  double total = 0.0;
  double clip_fraction = 0.0;  // samples whose ratio left [1 - eps, 1 + eps]
};

/// d min(r A, clip(r, 1-eps, 1+eps) A) / dr: A where the unclipped term is the
/// minimum, 0 where the clipped constant is.
inline double clipped_surrogate_slope(double ratio, double advantage, double eps) {
  const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
  return ratio * advantage <= clipped * advantage ? advantage : 0.0;
}

/// PPO loss over a minibatch. When grad is non-empty it receives d total / d params in
/// PolicyParams::flat() layout (overwritten, not accumulated).
inline LossReport ppo_loss(const PolicyParams& p, std::span<const PpoSample> batch, const PpoCoefficients& c,
                           std::span<double> grad = {}) {
  if (batch.empty()) throw ParameterError("empty PPO minibatch");
  const bool want_grad = !grad.empty();
  if (want_grad && grad.size() != p.param_count()) throw ParameterError("gradient buffer size mismatch");
  if (want_grad) std::fill(grad.begin(), grad.end(), 0.0);
  const auto actor_grad = want_grad ? grad.first(p.actor.param_count()) : std::span<double>{};
  const auto critic_grad = want_grad ? grad.subspan(p.actor.param_count()) : std::span<double>{};

  const double inv_n = 1.0 / static_cast<double>(batch.size());
  LossReport rep;
  Mlp::Cache actor_cache, critic_cache;
  std::array<double, kActionCount> dlogits{};
  for (const auto& s : batch) {
    auto logp = p.actor.forward(s.features, actor_cache);
    log_softmax(logp);
    std::array<double, kActionCount> probs{};
    double h = 0.0;
    for (int k = 0; k < kActionCount; ++k) {
      probs[static_cast<std::size_t>(k)] = std::exp(logp[static_cast<std::size_t>(k)]);
      h -= probs[static_cast<std::size_t>(k)] * logp[static_cast<std::size_t>(k)];
    }
    const double ratio = std::exp(logp[static_cast<std::size_t>(s.action)] - s.old_log_prob);
    const double clipped = std::clamp(ratio, 1.0 - c.clip_epsilon, 1.0 + c.clip_epsilon);
    rep.surrogate += std::min(ratio * s.advantage, clipped * s.advantage) * inv_n;
    rep.entropy += h * inv_n;
    if (clipped != ratio) rep.clip_fraction += inv_n;

    const double v = p.critic.forward(s.features, critic_cache)[0];
    rep.value_loss += (s.ret - v) * (s.ret - v) * inv_n;

    if (!want_grad) continue;
    // d(-surrogate)/dz_j = -slope * r * (1[j=a] - p_j);  d(-c_e H)/dz_j = c_e p_j (log p_j + H)
    const double slope = clipped_surrogate_slope(ratio, s.advantage, c.clip_epsilon);
    for (int k = 0; k < kActionCount; ++k) {
      const double pk = probs[static_cast<std::size_t>(k)];
      const double onehot = k == s.action ? 1.0 : 0.0;
      dlogits[static_cast<std::size_t>(k)] =
          inv_n * (-slope * ratio * (onehot - pk) + c.entropy_coef * pk * (logp[static_cast<std::size_t>(k)] + h));
    }
    p.actor.backward(actor_cache, dlogits, actor_grad);
    const double dv = inv_n * c.value_coef * 2.0 * (v - s.ret);
    p.critic.backward(critic_cache, std::span<const double>(&dv, 1), critic_grad);
  }
  rep.total = -rep.surrogate + c.value_coef * rep.value_loss - c.entropy_coef * rep.entropy;
  return rep;
}

/// Scales g in place so its Euclidean norm is at most max_norm; returns the norm before.
inline double clip_grad_norm(std::span<double> g, double max_norm) {
  double sq = 0.0;
  for (double x : g) sq += x * x;
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    for (double& x : g) x *= scale;
  }
  return norm;
}

/// Adam (Kingma & Ba) over a flat parameter vector.
class Adam {
 public:
  explicit Adam(std::size_t size, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(size, 0.0), v_(size, 0.0) {}

  void step(std::span<double> params, std::span<const double> grad) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
      v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
      params[i] -= lr_ * (m_[i] / bc1) / (std::sqrt(v_[i] / bc2) + eps_);
    }
  }

  void set_learning_rate(double lr) { lr_ = lr; }
  long steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  std::vector<double> m_, v_;
  long t_ = 0;
};

/// Builds PPO samples from collected trajectories (GAE per trajectory).
inline std::vector<PpoSample> make_ppo_batch(const std::vector<Trajectory>& trajectories, double gamma,
                                             double lambda) {
  std::vector<PpoSample> batch;
  for (const auto& traj : trajectories) {
    if (traj.empty()) continue;
    const auto gae = compute_gae(traj, gamma, lambda);
    for (std::size_t t = 0; t < traj.size(); ++t) {
      const auto& s = traj.steps[t];
      batch.push_back({s.features, s.action, s.log_prob, gae.advantages[t], gae.returns[t]});
    }
  }
  return batch;
}

struct PpoUpdateResult {
  PolicyParams params;
  LossReport report;  // averaged over all minibatch steps
};

/// epochs_per_update passes over the shuffled batch in minibatches; each minibatch takes
/// one Adam step on the total loss after clipping the actor and critic gradient norms
/// separately to gradient_clip_norm. Advantages are normalised over the whole batch
/// first. The input params are left untouched; a non-finite loss or gradient throws
/// TrainingError.
inline PpoUpdateResult ppo_update(std::vector<PpoSample> batch, const PolicyParams& params,
                                  const TrainConfig& config, Adam& optimizer, Rng& rng) {
  if (batch.empty()) throw ParameterError("empty PPO batch");
  if (config.normalize_advantages && batch.size() > 1) {
    double mean = 0.0;
    for (const auto& s : batch) mean += s.advantage;
    mean /= static_cast<double>(batch.size());
    double var = 0.0;
    for (const auto& s : batch) var += (s.advantage - mean) * (s.advantage - mean);
    const double sd = std::sqrt(var / static_cast<double>(batch.size()));
    for (auto& s : batch) s.advantage = (s.advantage - mean) / (sd + 1e-8);
  }
  const PpoCoefficients coef{config.clip_epsilon, config.value_coef, config.entropy_coef};
  PolicyParams next = params;
  optimizer.set_learning_rate(config.learning_rate);
  std::vector<double> flat = next.flat();
  std::vector<double> grad(flat.size());
  std::vector<std::size_t> order(batch.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<PpoSample> mb;
  PpoUpdateResult result;
  int steps = 0;
  const std::size_t actor_n = next.actor.param_count();
  for (int epoch = 0; epoch < config.epochs_per_update; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.minibatch)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.minibatch));
      mb.clear();
      for (std::size_t i = start; i < end; ++i) mb.push_back(batch[order[i]]);
      const auto rep = ppo_loss(next, mb, coef, grad);
      const bool finite = std::isfinite(rep.total) &&
                          std::all_of(grad.begin(), grad.end(), [](double g) { return std::isfinite(g); });
      if (!finite) {
        std::ostringstream msg;
        msg << "non-finite PPO loss at epoch " << epoch << ", minibatch offset " << start
            << ": surrogate=" << rep.surrogate << " value_loss=" << rep.value_loss << " entropy=" << rep.entropy;
        throw TrainingError(msg.str());
      }
      clip_grad_norm(std::span<double>(grad).first(actor_n), config.gradient_clip_norm);
      clip_grad_norm(std::span<double>(grad).subspan(actor_n), config.gradient_clip_norm);
      optimizer.step(flat, grad);
      next.assign_flat(flat);
      result.report.surrogate += rep.surrogate;
      result.report.value_loss += rep.value_loss;
      result.report.entropy += rep.entropy;
      result.report.total += rep.total;
      result.report.clip_fraction += rep.clip_fraction;
      ++steps;
    }
  }
  const double inv = 1.0 / steps;
  result.report.surrogate *= inv;
  result.report.value_loss *= inv;
  result.report.entropy *= inv;
  result.report.total *= inv;
  result.report.clip_fraction *= inv;
  result.params = std::move(next);
  return result;
}

}  // namespace ejlab::rl
