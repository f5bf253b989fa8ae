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

#ifndef KOAP_NUMERICS_GRAD_HPP_
#define KOAP_NUMERICS_GRAD_HPP_

#include <functional>

#include "koap/common.hpp"
#include "koap/numerics/param_vector.hpp"
#include "koap/numerics/tape.hpp"

namespace koap::numerics {

// Builds a loss graph on the given tape. All parameter reads must go through
// tape ops so the builder can be re-bound to a perturbed copy of the
// parameters (grad_check relies on this).
using GraphBuilder = std::function<void(Tape&)>;

// Evaluates the loss without a backward pass.
double loss_value(const GraphBuilder& f, const ParamVector& params);

// Reverse-mode gradient of the scalar loss; grad is resized and overwritten.
// Throws NumericError (naming the offending segment) on non-finite values.
double grad(const GraphBuilder& f, const ParamVector& params, Vec& grad_out);

// Max over coordinates of |analytic - central difference| / max(1, |analytic|).
double grad_check(const GraphBuilder& f, const ParamVector& params, double eps);

}  // namespace koap::numerics

#endif  // KOAP_NUMERICS_GRAD_HPP_
