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
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "ejlab/error.hpp"
#include "ejlab/faults.hpp"
#include "ejlab/rl/mlp.hpp"
#include "ejlab/topology.hpp"

namespace ejlab::rl {

inline constexpr int kFeatureCount = 10;
inline constexpr int kActionCount = kDirections;

/// State encodings. The version byte is stored in policy files.
enum class FeatureEncoding : std::uint8_t {
  /// [dx/M, dy/M, x/(a+b), y/(a+b), live0..live5]; (dx, dy) is the shortest-hop
  /// displacement to the destination modulo alpha.
  wrap_aware = 1,
  /// Same layout, but (dx, dy) is the plain difference of canonical representatives.
  raw = 2,
};

using Features = std::array<double, kFeatureCount>;

/// Everything the agent observes at one node.
struct RouteState {
  NodeId current = 0;
  NodeId dst = 0;
  std::array<bool, kDirections> liveness{};
  Features features{};
};

inline RouteState make_state(const Topology& topo, const FaultSet& faults, NodeId current, NodeId dst,
                             FeatureEncoding encoding = FeatureEncoding::wrap_aware) {
  RouteState s;
  s.current = current;
  s.dst = dst;
  const EisensteinInt disp = encoding == FeatureEncoding::wrap_aware
                                 ? topo.min_displacement(current, dst)
                                 : topo.representative(dst) - topo.representative(current);
  const auto& here = topo.representative(current);
  const double m = topo.diameter();
  const double span = static_cast<double>(topo.alpha().a + topo.alpha().b);
  s.features[0] = static_cast<double>(disp.a) / m;
  s.features[1] = static_cast<double>(disp.b) / m;
  s.features[2] = static_cast<double>(here.a) / span;
  s.features[3] = static_cast<double>(here.b) / span;
  for (int k = 0; k < kDirections; ++k) {
    const bool live = faults.is_live(topo.neighbor(current, k));
    s.liveness[static_cast<std::size_t>(k)] = live;
    s.features[static_cast<std::size_t>(4 + k)] = live ? 1.0 : 0.0;
  }
  return s;
}

/// In-place log-softmax.
inline void log_softmax(std::span<double> z) {
  double mx = z[0];
  for (double v : z) mx = std::max(mx, v);
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - mx);
  const double lse = mx + std::log(sum);
  for (double& v : z) v -= lse;
}

/// Actor (policy) and critic (state value) networks.
struct PolicyParams {
  Mlp actor;
  Mlp critic;
  FeatureEncoding encoding = FeatureEncoding::wrap_aware;
  /// Generators the policy was trained on (informational).
  std::vector<EisensteinInt> family;

  /// Actor kFeatureCount -> hidden... -> 6, critic kFeatureCount -> hidden... -> 1.
  static PolicyParams zeros(const std::vector<int>& hidden = {64, 64},
                            FeatureEncoding encoding = FeatureEncoding::wrap_aware) {
    std::vector<int> a{kFeatureCount}, c{kFeatureCount};
    a.insert(a.end(), hidden.begin(), hidden.end());
    c.insert(c.end(), hidden.begin(), hidden.end());
    a.push_back(kActionCount);
    c.push_back(1);
    PolicyParams p;
    p.actor = Mlp(a);
    p.critic = Mlp(c);
    p.encoding = encoding;
    return p;
  }

  static PolicyParams initialized(Rng& rng, const std::vector<int>& hidden = {64, 64},
                                  FeatureEncoding encoding = FeatureEncoding::wrap_aware) {
    auto p = zeros(hidden, encoding);
    p.actor.init_uniform(rng);
    p.critic.init_uniform(rng);
    return p;
  }

  std::size_t param_count() const { return actor.param_count() + critic.param_count(); }

  /// Actor parameters followed by critic parameters.
  std::vector<double> flat() const {
    std::vector<double> out(actor.params().begin(), actor.params().end());
    out.insert(out.end(), critic.params().begin(), critic.params().end());
    return out;
  }

  void assign_flat(std::span<const double> values) {
    if (values.size() != param_count()) throw ParameterError("flat parameter size mismatch");
    std::copy_n(values.begin(), actor.param_count(), actor.params().begin());
    std::copy(values.begin() + static_cast<std::ptrdiff_t>(actor.param_count()), values.end(),
              critic.params().begin());
  }

  void check_dimensions() const {
    if (actor.input_size() != kFeatureCount || critic.input_size() != kFeatureCount) {
      throw ParameterError("policy expects " + std::to_string(actor.input_size()) + " features, encoder produces " +
                           std::to_string(kFeatureCount));
    }
    if (actor.output_size() != kActionCount || critic.output_size() != 1) {
      throw ParameterError("policy output dimensions do not match 6 actions / scalar value");
    }
  }
};

/// Action probabilities pi(.|s).
inline std::array<double, kActionCount> actor_forward(const PolicyParams& p, std::span<const double> features) {
  auto z = p.actor.forward(features);
  log_softmax(z);
  std::array<double, kActionCount> probs{};
  for (int k = 0; k < kActionCount; ++k) probs[static_cast<std::size_t>(k)] = std::exp(z[static_cast<std::size_t>(k)]);
  return probs;
}

/// State value V(s).
inline double critic_forward(const PolicyParams& p, std::span<const double> features) {
  return p.critic.forward(features)[0];
}

inline double entropy(const std::array<double, kActionCount>& probs) {
  double h = 0.0;
  for (double q : probs) {
    if (q > 0.0) h -= q * std::log(q);
  }
  return h;
}

inline int argmax(const std::array<double, kActionCount>& probs) {
  int best = 0;
  for (int k = 1; k < kActionCount; ++k) {
    if (probs[static_cast<std::size_t>(k)] > probs[static_cast<std::size_t>(best)]) best = k;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Policy files
//
//   "EJPPO1"                    6 bytes
//   feature encoding version    u8
//   layer count                 u32, actor layers then critic layers
//   per layer                   u32 rows, u32 cols, rows*cols f64 row-major
//                               (cols = fan_in + 1; last column is the bias)
//   metadata length             u32
//   metadata                    ASCII "key=value;..." : actor_layers, hidden_activation,
//                               actor_output, critic_output, family
//
// All integers and floats little-endian.
// ---------------------------------------------------------------------------

namespace detail {

inline constexpr char kPolicyMagic[6] = {'E', 'J', 'P', 'P', 'O', '1'};

static_assert(std::endian::native == std::endian::little, "policy I/O assumes a little-endian host");

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& is) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw FormatError("truncated policy file");
  return v;
}

inline std::string family_string(const std::vector<EisensteinInt>& family) {
  std::string s;
  for (std::size_t i = 0; i < family.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(family[i].a) + '+' + std::to_string(family[i].b);
  }
  return s;
}

inline std::vector<EisensteinInt> parse_family(const std::string& s) {
  std::vector<EisensteinInt> out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    EisensteinInt z;
    if (std::sscanf(item.c_str(), "%ld+%ld", &z.a, &z.b) != 2) throw FormatError("bad family entry '" + item + "'");
    out.push_back(z);
  }
  return out;
}

}  // namespace detail

inline void write_policy(std::ostream& os, const PolicyParams& p) {
  os.write(detail::kPolicyMagic, sizeof detail::kPolicyMagic);
  detail::put<std::uint8_t>(os, static_cast<std::uint8_t>(p.encoding));
  detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(p.actor.layers().size() + p.critic.layers().size()));
  for (const Mlp* net : {&p.actor, &p.critic}) {
    for (const auto& l : net->layers()) {
      detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(l.out));
      detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(l.cols()));
      os.write(reinterpret_cast<const char*>(net->params().data() + l.offset),
               static_cast<std::streamsize>(l.size() * sizeof(double)));
    }
  }
  const std::string meta = "actor_layers=" + std::to_string(p.actor.layers().size()) +
                           ";hidden_activation=tanh;actor_output=softmax;critic_output=identity;family=" +
                           detail::family_string(p.family);
  detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(meta.size()));
  os.write(meta.data(), static_cast<std::streamsize>(meta.size()));
}

/// Reads a policy. Throws FormatError on a bad magic, an unknown or (when given)
/// unexpected feature version, or inconsistent layer dimensions.
inline PolicyParams read_policy(std::istream& is, std::optional<FeatureEncoding> expected = std::nullopt) {
  char magic[6] = {};
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, detail::kPolicyMagic, sizeof magic) != 0) {
    throw FormatError("not an EJPPO1 policy file");
  }
  const auto version = detail::get<std::uint8_t>(is);
  if (version != static_cast<std::uint8_t>(FeatureEncoding::wrap_aware) &&
      version != static_cast<std::uint8_t>(FeatureEncoding::raw)) {
    throw FormatError("unsupported feature-encoding version " + std::to_string(version));
  }
  if (expected && version != static_cast<std::uint8_t>(*expected)) {
    throw FormatError("policy feature-encoding version " + std::to_string(version) + " does not match expected " +
                      std::to_string(static_cast<int>(*expected)));
  }
  const auto layer_count = detail::get<std::uint32_t>(is);
  if (layer_count < 2 || layer_count > 64) throw FormatError("implausible layer count");
  struct Block {
    int rows, cols;
    std::vector<double> values;
  };
  std::vector<Block> blocks;
  for (std::uint32_t i = 0; i < layer_count; ++i) {
    Block b{static_cast<int>(detail::get<std::uint32_t>(is)), static_cast<int>(detail::get<std::uint32_t>(is)), {}};
    if (b.rows <= 0 || b.cols <= 1 || b.rows > 1 << 16 || b.cols > 1 << 16) throw FormatError("bad layer shape");
    b.values.resize(static_cast<std::size_t>(b.rows) * static_cast<std::size_t>(b.cols));
    if (!is.read(reinterpret_cast<char*>(b.values.data()),
                 static_cast<std::streamsize>(b.values.size() * sizeof(double)))) {
      throw FormatError("truncated policy file");
    }
    blocks.push_back(std::move(b));
  }
  const auto meta_len = detail::get<std::uint32_t>(is);
  std::string meta(meta_len, '\0');
  if (!is.read(meta.data(), meta_len)) throw FormatError("truncated policy metadata");

  std::size_t actor_layers = 0;
  std::string family;
  std::istringstream fields(meta);
  std::string field;
  while (std::getline(fields, field, ';')) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw FormatError("bad policy metadata field '" + field + "'");
    const auto key = field.substr(0, eq), value = field.substr(eq + 1);
    if (key == "actor_layers") actor_layers = std::stoul(value);
    else if (key == "family") family = value;
    else if (key == "hidden_activation" && value != "tanh") throw FormatError("unsupported activation " + value);
  }
  if (actor_layers == 0 || actor_layers >= blocks.size()) throw FormatError("bad actor layer count in metadata");

  auto make = [&](std::size_t first, std::size_t last) {
    std::vector<int> widths{blocks[first].cols - 1};
    for (std::size_t i = first; i < last; ++i) {
      if (blocks[i].cols - 1 != widths.back()) throw FormatError("layer dimensions do not chain");
      widths.push_back(blocks[i].rows);
    }
    Mlp net(widths);
    for (std::size_t i = first; i < last; ++i) net.set_layer(i - first, blocks[i].values);
    return net;
  };
  PolicyParams p;
  p.encoding = static_cast<FeatureEncoding>(version);
  p.actor = make(0, actor_layers);
  p.critic = make(actor_layers, blocks.size());
  p.family = detail::parse_family(family);
  try {
    p.check_dimensions();
  } catch (const ParameterError& e) {
    throw FormatError(e.what());
  }
  return p;
}

inline void save_policy(const PolicyParams& p, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write policy file " + path);
  write_policy(os, p);
}

inline PolicyParams load_policy(const std::string& path, std::optional<FeatureEncoding> expected = std::nullopt) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open policy file " + path);
  return read_policy(is, expected);
}

}  // namespace ejlab::rl
