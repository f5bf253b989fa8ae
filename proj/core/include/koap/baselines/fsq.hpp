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

#ifndef KOAP_BASELINES_FSQ_HPP_
#define KOAP_BASELINES_FSQ_HPP_

#include <vector>

#include "koap/common.hpp"
#include "koap/numerics/tape.hpp"

namespace koap::baselines {

// Finite scalar quantization: per-dimension clamp to a symmetric range, then
// rounding to a fixed grid of `levels[i]` values. No learned codebook; the
// implicit codebook size is the product of the levels.
struct FsqSpec {
  std::vector<int> levels = {5, 5, 5};

  Index dim() const { return static_cast<Index>(levels.size()); }
  long codebook_size() const;
  // Grid half-width for dimension i: (levels[i] - 1) / 2.
  double half_width(std::size_t i) const { return (levels[i] - 1) / 2.0; }
  void validate() const;
};

// Idempotent: grid points map to themselves.
Vec fsq_quantize(const FsqSpec& spec, const Vec& v);

// Flat code index in [0, codebook_size) for a quantized vector.
long fsq_code_index(const FsqSpec& spec, const Vec& q);

// Quantization with straight-through (identity) gradient for training.
numerics::Tape::NodeId fsq_quantize_st(numerics::Tape& tape,
                                       const FsqSpec& spec,
                                       numerics::Tape::NodeId v);

}  // namespace koap::baselines

#endif  // KOAP_BASELINES_FSQ_HPP_
