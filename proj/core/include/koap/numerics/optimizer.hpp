// Copyright 2026 The KOAP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef KOAP_NUMERICS_OPTIMIZER_HPP_
#define KOAP_NUMERICS_OPTIMIZER_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "koap/common.hpp"
#include "koap/numerics/param_vector.hpp"

namespace koap::numerics {

struct OptimizerSettings {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-4;  // decoupled
};

// Adaptive-moment optimizer state with decoupled weight decay. An optional
// trainable mask freezes parameter blocks: frozen coordinates receive neither
// the gradient step nor the decay, so staged training leaves them bit-equal.
struct OptimizerState {
  std::int64_t step = 0;
  Vec m;
  Vec v;
  Vec mask;  // 1 = trainable; empty means all trainable
  OptimizerSettings settings;

  static OptimizerState create(Index n, const OptimizerSettings& s);

  void freeze_segments(const ParamVector& params,
                       const std::vector<std::string>& prefixes);
  void freeze_all_except(const ParamVector& params,
                         const std::vector<std::string>& prefixes);
};

// One update in place. Throws NumericError on non-finite gradients.
void opt_step(OptimizerState& state, ParamVector& params, const Vec& grads);

}  // namespace koap::numerics

#endif  // KOAP_NUMERICS_OPTIMIZER_HPP_
