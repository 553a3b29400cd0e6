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

#include <stdexcept>
#include <string>

namespace ejlab {

/// Invalid generator, fault spec, config value, or similar caller error.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid experiment configuration (unknown key, wrong type, bad value).
class ConfigError : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

/// Integer overflow in Eisenstein arithmetic.
class OverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

/// Malformed or incompatible file contents (topology dumps, fault sets, policy files).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure during training (non-finite loss or gradient).
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ejlab
