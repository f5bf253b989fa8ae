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

#ifndef KOAP_NUMERICS_MLP_HPP_
#define KOAP_NUMERICS_MLP_HPP_

#include <string>
#include <vector>

#include "koap/common.hpp"
#include "koap/numerics/param_vector.hpp"
#include "koap/numerics/tape.hpp"

namespace koap::numerics {

enum class Activation { kTanh, kRelu };

// Affine stack. widths = [input, hidden..., output]; the activation is
// applied after every layer except the last, so widths of size 2 is a single
// affine map.
struct MlpSpec {
  std::vector<Index> widths;
  Activation activation = Activation::kTanh;

  Index input_dim() const { return widths.front(); }
  Index output_dim() const { return widths.back(); }
  Index layer_count() const { return static_cast<Index>(widths.size()) - 1; }
  void validate() const;
};

// Resolved segment handles for one MLP instance.
struct MlpParams {
  std::vector<ParamVector::Segment> w;
  std::vector<ParamVector::Segment> b;
};

MlpParams register_mlp(ParamVector::Builder& builder, const std::string& prefix,
                       const MlpSpec& spec);

// Glorot-uniform weights, zero biases.
void init_mlp(ParamVector& params, const MlpParams& mp, Rng& rng);

Vec mlp_forward(const MlpSpec& spec, const MlpParams& mp,
                const ParamVector& params, const Vec& input);

Tape::NodeId mlp_forward(Tape& tape, const MlpSpec& spec, const MlpParams& mp,
                         Tape::NodeId input);

}  // namespace koap::numerics

#endif  // KOAP_NUMERICS_MLP_HPP_
