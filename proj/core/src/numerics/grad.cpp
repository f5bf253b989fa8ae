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

#include "koap/numerics/grad.hpp"

#include <cmath>

namespace koap::numerics {

double loss_value(const GraphBuilder& f, const ParamVector& params) {
  Tape tape(params);
  f(tape);
  return tape.loss();
}

double grad(const GraphBuilder& f, const ParamVector& params, Vec& grad_out) {
  Tape tape(params);
  f(tape);
  double loss = tape.loss();
  if (!std::isfinite(loss)) {
    // Point at a non-finite parameter block if there is one; otherwise the
    // loss itself blew up.
    for (Index i = 0; i < params.size(); ++i) {
      if (!std::isfinite(params.values()[i])) {
        throw NumericError("non-finite loss; parameter segment '" +
                           params.segment_name_at(i) + "' is non-finite");
      }
    }
    throw NumericError("non-finite loss with finite parameters");
  }
  grad_out.setZero(params.size());
  tape.backward(grad_out);
  if (!grad_out.allFinite()) {
    for (Index i = 0; i < grad_out.size(); ++i) {
      if (!std::isfinite(grad_out[i])) {
        throw NumericError("non-finite gradient in segment '" +
                           params.segment_name_at(i) + "'");
      }
    }
  }
  return loss;
}

double grad_check(const GraphBuilder& f, const ParamVector& params,
                  double eps) {
  if (eps <= 0.0) throw ConfigError("grad_check eps must be positive");
  Vec analytic;
  grad(f, params, analytic);
  ParamVector probe = params;
  double worst = 0.0;
  for (Index i = 0; i < params.size(); ++i) {
    const double saved = probe.values()[i];
    probe.values()[i] = saved + eps;
    double up = loss_value(f, probe);
    probe.values()[i] = saved - eps;
    double down = loss_value(f, probe);
    probe.values()[i] = saved;
    double fd = (up - down) / (2.0 * eps);
    double err = std::abs(analytic[i] - fd) / std::max(1.0, std::abs(analytic[i]));
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace koap::numerics
