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

#include <cstdint>
#include <initializer_list>
#include <random>
#include <utility>
#include <vector>

namespace ejlab {

/// SplitMix64 finaliser (Steele, Lea, Flood 2014).
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Counter-based seed derivation: seed for stream (master, i0, i1, ...). Adding new
/// indices never perturbs the seeds of existing ones.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = splitmix64(master);
  for (auto i : path) s = splitmix64(s ^ splitmix64(i + 0x632BE59BD9B4E019ULL));
  return s;
}

/// Deterministic generator: std::mt19937_64 (fully specified by the standard) with
/// distribution code written here, so results do not depend on the standard library's
/// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [0, n), n > 0. Rejection sampling on the top of the range.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  template <typename T>
  const T& pick(const std::vector<T>& items) {
    return items[static_cast<std::size_t>(below(items.size()))];
  }

  /// Fisher-Yates shuffle, high index first.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[static_cast<std::size_t>(below(i))]);
    }
  }

  /// First k items of a partial Fisher-Yates pass from the front: a uniform sample
  /// without replacement, in draw order.
  template <typename T>
  std::vector<T> sample(std::vector<T> items, std::size_t k) {
    for (std::size_t i = 0; i < k; ++i) {
      std::swap(items[i], items[i + static_cast<std::size_t>(below(items.size() - i))]);
    }
    items.resize(k);
    return items;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ejlab
