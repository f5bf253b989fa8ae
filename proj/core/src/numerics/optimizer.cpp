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

#include "koap/numerics/optimizer.hpp"

#include <cmath>

namespace koap::numerics {

OptimizerState OptimizerState::create(Index n, const OptimizerSettings& s) {
  OptimizerState st;
  st.m = Vec::Zero(n);
  st.v = Vec::Zero(n);
  st.settings = s;
  return st;
}

void OptimizerState::freeze_segments(const ParamVector& params,
                                     const std::vector<std::string>& prefixes) {
  if (mask.size() == 0) mask = Vec::Ones(params.size());
  for (const auto& seg : params.segments()) {
    for (const auto& p : prefixes) {
      if (seg.name.rfind(p, 0) == 0) {
        mask.segment(seg.offset, seg.size()).setZero();
      }
    }
  }
}

void OptimizerState::freeze_all_except(
    const ParamVector& params, const std::vector<std::string>& prefixes) {
  mask = Vec::Zero(params.size());
  for (const auto& seg : params.segments()) {
    for (const auto& p : prefixes) {
      if (seg.name.rfind(p, 0) == 0) {
        mask.segment(seg.offset, seg.size()).setOnes();
      }
    }
  }
}

void opt_step(OptimizerState& state, ParamVector& params, const Vec& grads) {
  if (grads.size() != params.size() || state.m.size() != params.size()) {
    throw ConfigError("optimizer length mismatch");
  }
  if (!grads.allFinite()) {
    for (Index i = 0; i < grads.size(); ++i) {
      if (!std::isfinite(grads[i])) {
        throw NumericError("non-finite gradient in segment '" +
                           params.segment_name_at(i) + "'");
      }
    }
  }
  const auto& s = state.settings;
  state.step += 1;
  state.m = s.beta1 * state.m + (1.0 - s.beta1) * grads;
  state.v = s.beta2 * state.v.array() +
            (1.0 - s.beta2) * grads.array().square();
  const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(state.step));
  Vec update = (state.m.array() / bc1) /
               ((state.v.array() / bc2).sqrt() + s.eps);
  update = s.lr * update.array() +
           s.lr * s.weight_decay * params.values().array();
  if (state.mask.size() != 0) {
    update = update.cwiseProduct(state.mask);
  }
  params.values() -= update;
}

}  // namespace koap::numerics
