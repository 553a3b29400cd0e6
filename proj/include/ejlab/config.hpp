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

#include <openssl/evp.h>

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ejlab/eisenstein.hpp"
#include "ejlab/engine.hpp"
#include "ejlab/error.hpp"
#include "ejlab/faults.hpp"
#include "ejlab/random.hpp"
#include "ejlab/rl/train_config.hpp"
#include "ejlab/routing.hpp"
#include "ejlab/sim.hpp"

namespace ejlab {

using Json = nlohmann::json;

/// Fully resolved experiment description. Every field has a default; a config file
/// overrides any subset of them.
struct ExperimentConfig {
  std::optional<std::uint64_t> seed;
  EisensteinInt alpha{3, 4};

  // faults / reachability
  FaultModel fault_model = FaultModel::uniform;
  std::vector<int> fault_counts{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  int trials = 20;
  int pairs = 200;
  int penalty = 0;

  // engines
  std::vector<EngineKind> engines{EngineKind::greedy, EngineKind::dijkstra, EngineKind::rl};
  GreedyMetric greedy_metric = GreedyMetric::hop;
  std::string policy;  // policy file; empty means train one

  rl::TrainConfig training;

  // traffic
  TrafficConfig traffic;
  FaultModel traffic_fault_model = FaultModel::clustered;
  int traffic_fault_count = 5;

  std::uint64_t require_seed() const {
    if (!seed) throw ConfigError("no seed: pass --seed or set \"seed\" in the config");
    return *seed;
  }

  /// Sweep parameters without a seed, for validation.
  ReachabilityConfig sweep_params() const {
    ReachabilityConfig r;
    r.fault_model = fault_model;
    r.fault_counts = fault_counts;
    r.trials = trials;
    r.pairs = pairs;
    r.penalty = penalty;
    return r;
  }

  ReachabilityConfig reachability() const {
    ReachabilityConfig r = sweep_params();
    r.seed = derive_seed(require_seed(), {10});
    return r;
  }

  TrafficConfig traffic_config() const {
    TrafficConfig t = traffic;
    t.seed = derive_seed(require_seed(), {11});
    return t;
  }

  FaultSpec traffic_faults() const {
    return FaultSpec::with_count(traffic_fault_model, traffic_fault_count, derive_seed(require_seed(), {12}));
  }

  rl::TrainConfig train_config() const {
    rl::TrainConfig t = training;
    t.seed = derive_seed(require_seed(), {13});
    return t;
  }
};

namespace detail {

inline std::string join_key(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

/// Reads one JSON object, remembering which keys were consumed so that leftovers
/// can be reported by name.
class ConfigSection {
 public:
  ConfigSection(const Json& j, std::string path) : json_(&j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError("config section '" + (path_.empty() ? "<root>" : path_) + "' must be an object");
  }

  bool has(const std::string& key) const { return json_->contains(key); }

  const Json* take(const std::string& key) {
    used_.insert(key);
    const auto it = json_->find(key);
    return it == json_->end() ? nullptr : &*it;
  }

  template <class T>
  void get(const std::string& key, T& out) {
    const Json* v = take(key);
    if (v == nullptr) return;
    try {
      out = convert<T>(*v);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError("config key '" + join_key(path_, key) + "': " + e.what());
    }
  }

  std::optional<ConfigSection> child(const std::string& key) {
    const Json* v = take(key);
    if (v == nullptr) return std::nullopt;
    return ConfigSection(*v, join_key(path_, key));
  }

  void finish() const {
    for (const auto& item : json_->items()) {
      if (!used_.count(item.key())) throw ConfigError("unknown config key '" + join_key(path_, item.key()) + "'");
    }
  }

 private:
  template <class T>
  static T convert(const Json& v);

  const Json* json_;
  std::string path_;
  std::set<std::string> used_;
};

inline EisensteinInt alpha_from_json(const Json& v) {
  if (!v.is_array() || v.size() != 2) throw ParameterError("expected [a, b]");
  return {v.at(0).get<std::int64_t>(), v.at(1).get<std::int64_t>()};
}

template <class T>
T ConfigSection::convert(const Json& v) {
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw ParameterError("expected a boolean");
    return v.get<bool>();
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw ParameterError("expected an integer");
    if constexpr (std::is_unsigned_v<T>) {
      if (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0) {
        throw ParameterError("expected a non-negative integer");
      }
    }
    return v.get<T>();
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) throw ParameterError("expected a number");
    return v.get<T>();
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) throw ParameterError("expected a string");
    return v.get<std::string>();
  } else if constexpr (std::is_same_v<T, std::optional<std::uint64_t>>) {
    return convert<std::uint64_t>(v);
  } else if constexpr (std::is_same_v<T, EisensteinInt>) {
    return alpha_from_json(v);
  } else if constexpr (std::is_same_v<T, FaultModel>) {
    return parse_fault_model(convert<std::string>(v));
  } else if constexpr (std::is_same_v<T, EngineKind>) {
    return parse_engine(convert<std::string>(v));
  } else if constexpr (std::is_same_v<T, GreedyMetric>) {
    const auto s = convert<std::string>(v);
    if (s == "hop") return GreedyMetric::hop;
    if (s == "raw_euclidean") return GreedyMetric::raw_euclidean;
    throw ParameterError("unknown greedy metric '" + s + "'");
  } else if constexpr (std::is_same_v<T, rl::FeatureEncoding>) {
    const auto s = convert<std::string>(v);
    if (s == "wrap_aware") return rl::FeatureEncoding::wrap_aware;
    if (s == "raw") return rl::FeatureEncoding::raw;
    throw ParameterError("unknown feature encoding '" + s + "'");
  } else {
    if (!v.is_array()) throw ParameterError("expected a list");
    T out;
    for (const auto& e : v) out.push_back(convert<typename T::value_type>(e));
    return out;
  }
}

inline std::string greedy_metric_name(GreedyMetric m) { return m == GreedyMetric::hop ? "hop" : "raw_euclidean"; }

inline std::string encoding_name(rl::FeatureEncoding e) {
  return e == rl::FeatureEncoding::wrap_aware ? "wrap_aware" : "raw";
}

template <class E>
Json names(const std::vector<E>& v) {
  Json out = Json::array();
  for (auto e : v) out.push_back(std::string(to_string(e)));
  return out;
}

inline Json alphas(const std::vector<EisensteinInt>& v) {
  Json out = Json::array();
  for (const auto& a : v) out.push_back({a.a, a.b});
  return out;
}

}  // namespace detail

/// Parses a config document. Unknown keys anywhere are rejected with their dotted path.
inline ExperimentConfig parse_config(const Json& doc) {
  ExperimentConfig c;
  detail::ConfigSection root(doc, "");
  root.get("seed", c.seed);
  if (auto s = root.child("topology")) {
    s->get("a", c.alpha.a);
    s->get("b", c.alpha.b);
    s->finish();
  }
  if (auto s = root.child("faults")) {
    s->get("model", c.fault_model);
    s->get("counts", c.fault_counts);
    s->get("trials", c.trials);
    s->get("pairs", c.pairs);
    s->get("penalty", c.penalty);
    s->finish();
  }
  if (auto s = root.child("engine")) {
    s->get("engines", c.engines);
    s->get("greedy_metric", c.greedy_metric);
    s->get("policy", c.policy);
    s->finish();
  }
  if (auto s = root.child("training")) {
    auto& t = c.training;
    s->get("gamma", t.gamma);
    s->get("gae_lambda", t.gae_lambda);
    s->get("clip_epsilon", t.clip_epsilon);
    s->get("learning_rate", t.learning_rate);
    s->get("episodes_per_density", t.episodes_per_density);
    s->get("curriculum", t.curriculum);
    s->get("rollout_batch", t.rollout_batch);
    s->get("epochs_per_update", t.epochs_per_update);
    s->get("minibatch", t.minibatch);
    s->get("value_coef", t.value_coef);
    s->get("entropy_coef", t.entropy_coef);
    s->get("gradient_clip_norm", t.gradient_clip_norm);
    s->get("normalize_advantages", t.normalize_advantages);
    s->get("reward_goal", t.reward.goal);
    s->get("reward_fault", t.reward.fault);
    s->get("reward_step", t.reward.step);
    s->get("encoding", t.encoding);
    s->get("hidden", t.hidden);
    s->get("family", t.family);
    s->get("fault_models", t.fault_models);
    s->get("behavior_clone", t.behavior_clone);
    s->get("bc_pairs", t.bc_pairs);
    s->get("bc_epochs", t.bc_epochs);
    s->get("bc_learning_rate", t.bc_learning_rate);
    s->finish();
  }
  if (auto s = root.child("traffic")) {
    auto& t = c.traffic;
    s->get("loads", t.loads);
    s->get("cycles", t.cycles);
    s->get("seeds", t.seeds);
    s->get("buffer", t.buffer);
    s->get("ttl", t.ttl);
    s->get("decay_length", t.decay_length);
    s->get("fault_model", c.traffic_fault_model);
    s->get("fault_count", c.traffic_fault_count);
    s->finish();
  }
  root.finish();
  c.training.validate();
  c.traffic.validate();
  c.sweep_params().validate();
  if (c.alpha.a <= 0 || c.alpha.b < c.alpha.a) throw ConfigError("topology needs 0 < a <= b");
  return c;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

/// The resolved config as JSON; parse_config(to_json(c)) reproduces c.
inline Json to_json(const ExperimentConfig& c) {
  const auto& t = c.training;
  Json doc;
  if (c.seed) doc["seed"] = *c.seed;
  doc["topology"] = {{"a", c.alpha.a}, {"b", c.alpha.b}};
  doc["faults"] = {{"model", std::string(to_string(c.fault_model))},
                   {"counts", c.fault_counts},
                   {"trials", c.trials},
                   {"pairs", c.pairs},
                   {"penalty", c.penalty}};
  doc["engine"] = {{"engines", detail::names(c.engines)},
                   {"greedy_metric", detail::greedy_metric_name(c.greedy_metric)},
                   {"policy", c.policy}};
  doc["training"] = {{"gamma", t.gamma},
                     {"gae_lambda", t.gae_lambda},
                     {"clip_epsilon", t.clip_epsilon},
                     {"learning_rate", t.learning_rate},
                     {"episodes_per_density", t.episodes_per_density},
                     {"curriculum", t.curriculum},
                     {"rollout_batch", t.rollout_batch},
                     {"epochs_per_update", t.epochs_per_update},
                     {"minibatch", t.minibatch},
                     {"value_coef", t.value_coef},
                     {"entropy_coef", t.entropy_coef},
                     {"gradient_clip_norm", t.gradient_clip_norm},
                     {"normalize_advantages", t.normalize_advantages},
                     {"reward_goal", t.reward.goal},
                     {"reward_fault", t.reward.fault},
                     {"reward_step", t.reward.step},
                     {"encoding", detail::encoding_name(t.encoding)},
                     {"hidden", t.hidden},
                     {"family", detail::alphas(t.family)},
                     {"fault_models", detail::names(t.fault_models)},
                     {"behavior_clone", t.behavior_clone},
                     {"bc_pairs", t.bc_pairs},
                     {"bc_epochs", t.bc_epochs},
                     {"bc_learning_rate", t.bc_learning_rate}};
  doc["traffic"] = {{"loads", c.traffic.loads},
                    {"cycles", c.traffic.cycles},
                    {"seeds", c.traffic.seeds},
                    {"buffer", c.traffic.buffer},
                    {"ttl", c.traffic.ttl},
                    {"decay_length", c.traffic.decay_length},
                    {"fault_model", std::string(to_string(c.traffic_fault_model))},
                    {"fault_count", c.traffic_fault_count}};
  return doc;
}

/// Git blob object id (SHA-1 over "blob <size>\0<content>"), lower-case hex.
inline std::string git_blob_hash(const std::string& content) {
  const std::string object = "blob " + std::to_string(content.size()) + std::string(1, '\0') + content;
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(object.data(), object.size(), digest, &len, EVP_sha1(), nullptr) != 1) {
    throw std::runtime_error("SHA-1 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 15];
  }
  return out;
}

/// Canonical text of the resolved config: sorted keys, two-space indent, trailing newline.
inline std::string canonical_config(const ExperimentConfig& c) { return to_json(c).dump(2) + "\n"; }

/// Hash recorded in every output. Output locations are not part of the config, so the
/// same experiment written to two directories carries the same hash.
inline std::string manifest_hash(const ExperimentConfig& c) { return git_blob_hash(canonical_config(c)); }

}  // namespace ejlab
