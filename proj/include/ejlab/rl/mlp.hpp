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
#include <cstddef>
#include <span>
#include <vector>

#include "ejlab/error.hpp"
#include "ejlab/random.hpp"

namespace ejlab::rl {

/// Shape of one dense layer. Its parameters are an out x (in + 1) row-major block of
/// the owning Mlp's flat parameter vector; the last column of each row is the bias.
struct LayerShape {
  int in = 0;
  int out = 0;
  std::size_t offset = 0;

  std::size_t cols() const { return static_cast<std::size_t>(in) + 1; }
  std::size_t size() const { return static_cast<std::size_t>(out) * cols(); }
};

/// Fully connected network: tanh on every hidden layer, identity on the output.
class Mlp {
 public:
  /// Intermediate activations kept for backprop. activations[0] is the input.
  struct Cache {
    std::vector<std::vector<double>> activations;
  };

  Mlp() = default;

  /// widths = {in, hidden..., out}; all parameters zero.
  explicit Mlp(const std::vector<int>& widths) {
    if (widths.size() < 2) throw ParameterError("an MLP needs at least input and output widths");
    std::size_t offset = 0;
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
      if (widths[i] <= 0 || widths[i + 1] <= 0) throw ParameterError("MLP widths must be positive");
      LayerShape shape{widths[i], widths[i + 1], offset};
      offset += shape.size();
      layers_.push_back(shape);
    }
    params_.assign(offset, 0.0);
  }

  /// Symmetric uniform weights with limit sqrt(6 / (fan_in + fan_out)); zero biases.
  void init_uniform(Rng& rng) {
    for (const auto& l : layers_) {
      const double limit = std::sqrt(6.0 / (l.in + l.out));
      for (int o = 0; o < l.out; ++o) {
        for (int i = 0; i < l.in; ++i) at(l, o, i) = rng.uniform(-limit, limit);
        at(l, o, l.in) = 0.0;
      }
    }
  }

  int input_size() const { return layers_.empty() ? 0 : layers_.front().in; }
  int output_size() const { return layers_.empty() ? 0 : layers_.back().out; }
  const std::vector<LayerShape>& layers() const { return layers_; }

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  std::size_t param_count() const { return params_.size(); }

  /// Replaces the parameter block of one layer (out x (in + 1), row-major).
  void set_layer(std::size_t index, std::span<const double> values) {
    const auto& l = layers_.at(index);
    if (values.size() != l.size()) throw ParameterError("layer parameter count mismatch");
    std::copy(values.begin(), values.end(), params_.begin() + static_cast<std::ptrdiff_t>(l.offset));
  }

  std::vector<double> forward(std::span<const double> x) const {
    Cache cache;
    return forward(x, cache);
  }

  std::vector<double> forward(std::span<const double> x, Cache& cache) const {
    if (static_cast<int>(x.size()) != input_size()) throw ParameterError("MLP input dimension mismatch");
    cache.activations.resize(layers_.size() + 1);
    cache.activations[0].assign(x.begin(), x.end());
    for (std::size_t li = 0; li < layers_.size(); ++li) {
      const auto& l = layers_[li];
      const auto& in = cache.activations[li];
      auto& out = cache.activations[li + 1];
      out.resize(static_cast<std::size_t>(l.out));
      const bool hidden = li + 1 < layers_.size();
      for (int o = 0; o < l.out; ++o) {
        const double* row = &params_[l.offset + static_cast<std::size_t>(o) * l.cols()];
        double z = row[l.in];
        for (int i = 0; i < l.in; ++i) z += row[i] * in[static_cast<std::size_t>(i)];
        out[static_cast<std::size_t>(o)] = hidden ? std::tanh(z) : z;
      }
    }
    return cache.activations.back();
  }

  /// Adds dL/dparams to grad (same layout as params()) given dL/doutput.
  void backward(const Cache& cache, std::span<const double> grad_out, std::span<double> grad) const {
    std::vector<double> delta(grad_out.begin(), grad_out.end());
    std::vector<double> prev;
    for (std::size_t li = layers_.size(); li-- > 0;) {
      const auto& l = layers_[li];
      const auto& in = cache.activations[li];
      prev.assign(static_cast<std::size_t>(l.in), 0.0);
      for (int o = 0; o < l.out; ++o) {
        const double d = delta[static_cast<std::size_t>(o)];
        if (d == 0.0) continue;
        const std::size_t base = l.offset + static_cast<std::size_t>(o) * l.cols();
        const double* row = &params_[base];
        double* g = &grad[base];
        for (int i = 0; i < l.in; ++i) {
          g[i] += d * in[static_cast<std::size_t>(i)];
          prev[static_cast<std::size_t>(i)] += d * row[i];
        }
        g[l.in] += d;
      }
      if (li > 0) {
        // in = tanh(z) for every hidden layer
        for (int i = 0; i < l.in; ++i) {
          const double a = in[static_cast<std::size_t>(i)];
          prev[static_cast<std::size_t>(i)] *= 1.0 - a * a;
        }
      }
      delta.swap(prev);
    }
  }

 private:
  double& at(const LayerShape& l, int o, int i) {
    return params_[l.offset + static_cast<std::size_t>(o) * l.cols() + static_cast<std::size_t>(i)];
  }

  std::vector<LayerShape> layers_;
  std::vector<double> params_;
};

}  // namespace ejlab::rl
