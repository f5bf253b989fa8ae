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

#include "koap/numerics/mlp.hpp"

#include <cmath>

namespace koap::numerics {

void MlpSpec::validate() const {
  if (widths.size() < 2) {
    throw ConfigError("mlp spec needs at least one affine layer");
  }
  for (Index w : widths) {
    if (w < 1) throw ConfigError("mlp spec widths must be >= 1");
  }
}

MlpParams register_mlp(ParamVector::Builder& builder, const std::string& prefix,
                       const MlpSpec& spec) {
  spec.validate();
  MlpParams mp;
  for (Index l = 0; l < spec.layer_count(); ++l) {
    mp.w.push_back(builder.add(prefix + ".w" + std::to_string(l),
                               {spec.widths[l + 1], spec.widths[l]}));
    mp.b.push_back(
        builder.add(prefix + ".b" + std::to_string(l), {spec.widths[l + 1]}));
  }
  return mp;
}

void init_mlp(ParamVector& params, const MlpParams& mp, Rng& rng) {
  for (std::size_t l = 0; l < mp.w.size(); ++l) {
    const auto& w = mp.w[l];
    double bound = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    std::uniform_real_distribution<double> u(-bound, bound);
    auto m = params.mat(w);
    for (Index c = 0; c < m.cols(); ++c) {
      for (Index r = 0; r < m.rows(); ++r) m(r, c) = u(rng);
    }
    params.vec(mp.b[l]).setZero();
  }
}

Vec mlp_forward(const MlpSpec& spec, const MlpParams& mp,
                const ParamVector& params, const Vec& input) {
  if (input.size() != spec.input_dim()) {
    throw ConfigError("mlp input size " + std::to_string(input.size()) +
                      " != " + std::to_string(spec.input_dim()));
  }
  Vec h = input;
  for (Index l = 0; l < spec.layer_count(); ++l) {
    Vec z = params.mat(mp.w[l]) * h;
    z += params.vec(mp.b[l]);
    if (l + 1 < spec.layer_count()) {
      h = spec.activation == Activation::kTanh
              ? Vec(z.array().tanh())
              : Vec(z.cwiseMax(0.0));
    } else {
      h = std::move(z);
    }
  }
  return h;
}

Tape::NodeId mlp_forward(Tape& tape, const MlpSpec& spec, const MlpParams& mp,
                         Tape::NodeId input) {
  if (tape.value(input).size() != spec.input_dim()) {
    throw ConfigError("mlp input size mismatch");
  }
  Tape::NodeId h = input;
  for (Index l = 0; l < spec.layer_count(); ++l) {
    h = tape.linear(mp.w[l], mp.b[l], h);
    if (l + 1 < spec.layer_count()) {
      h = spec.activation == Activation::kTanh ? tape.tanh(h) : tape.relu(h);
    }
  }
  return h;
}

}  // namespace koap::numerics
