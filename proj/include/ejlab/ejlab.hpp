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

#include "ejlab/config.hpp"
#include "ejlab/eisenstein.hpp"
#include "ejlab/engine.hpp"
#include "ejlab/error.hpp"
#include "ejlab/faults.hpp"
#include "ejlab/parallel.hpp"
#include "ejlab/plot.hpp"
#include "ejlab/random.hpp"
#include "ejlab/rl/env.hpp"
#include "ejlab/rl/gae.hpp"
#include "ejlab/rl/mlp.hpp"
#include "ejlab/rl/policy.hpp"
#include "ejlab/rl/ppo.hpp"
#include "ejlab/rl/router.hpp"
#include "ejlab/rl/train.hpp"
#include "ejlab/rl/train_config.hpp"
#include "ejlab/routing.hpp"
#include "ejlab/sim.hpp"
#include "ejlab/topology.hpp"
