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

#include "koap/numerics/seq_encoder.hpp"

#include <cmath>

namespace koap::numerics {

namespace {

Vec sigmoid(const Vec& x) { return 1.0 / (1.0 + (-x.array()).exp()); }

}  // namespace

void SeqEncoderSpec::validate() const {
  if (input_dim < 1 || hidden_dim < 1 || output_dim < 1) {
    throw ConfigError("seq encoder dims must be positive");
  }
}

SeqEncoderParams register_seq_encoder(ParamVector::Builder& builder,
                                      const std::string& prefix,
                                      const SeqEncoderSpec& spec) {
  spec.validate();
  SeqEncoderParams sp;
  const Index in = spec.input_dim + spec.hidden_dim;
  const char* gru_gates[] = {"r", "z", "h"};
  const char* lstm_gates[] = {"i", "f", "g", "o"};
  const bool gru = spec.cell == RecurrentCell::kGru;
  const int n_gates = gru ? 3 : 4;
  for (int g = 0; g < n_gates; ++g) {
    const char* name = gru ? gru_gates[g] : lstm_gates[g];
    sp.gate_w.push_back(builder.add(prefix + ".w" + name, {spec.hidden_dim, in}));
    sp.gate_b.push_back(builder.add(prefix + ".b" + name, {spec.hidden_dim}));
  }
  sp.readout_w =
      builder.add(prefix + ".wro", {spec.output_dim, spec.hidden_dim});
  sp.readout_b = builder.add(prefix + ".bro", {spec.output_dim});
  return sp;
}

void init_seq_encoder(ParamVector& params, const SeqEncoderParams& sp,
                      Rng& rng) {
  auto glorot = [&](const ParamVector::Segment& w) {
    double bound = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    std::uniform_real_distribution<double> u(-bound, bound);
    auto m = params.mat(w);
    for (Index c = 0; c < m.cols(); ++c) {
      for (Index r = 0; r < m.rows(); ++r) m(r, c) = u(rng);
    }
  };
  for (const auto& w : sp.gate_w) glorot(w);
  for (const auto& b : sp.gate_b) params.vec(b).setZero();
  glorot(sp.readout_w);
  params.vec(sp.readout_b).setZero();
}

std::vector<Vec> seq_forward(const SeqEncoderSpec& spec,
                             const SeqEncoderParams& sp,
                             const ParamVector& params,
                             const std::vector<Vec>& states) {
  if (states.size() < 2) {
    throw WindowError("seq encoder needs at least 2 states, got " +
                      std::to_string(states.size()));
  }
  for (const Vec& s : states) {
    if (s.size() != spec.input_dim) {
      throw ConfigError("seq encoder state dim mismatch");
    }
  }
  const bool gru = spec.cell == RecurrentCell::kGru;
  Vec h = Vec::Zero(spec.hidden_dim);
  Vec c = Vec::Zero(spec.hidden_dim);  // LSTM cell state
  std::vector<Vec> out;
  out.reserve(states.size() - 1);
  Vec xh(spec.input_dim + spec.hidden_dim);
  for (std::size_t t = 0; t < states.size(); ++t) {
    xh << states[t], h;
    if (gru) {
      Vec r = sigmoid(params.mat(sp.gate_w[0]) * xh + params.vec(sp.gate_b[0]));
      Vec z = sigmoid(params.mat(sp.gate_w[1]) * xh + params.vec(sp.gate_b[1]));
      Vec xrh(spec.input_dim + spec.hidden_dim);
      xrh << states[t], r.cwiseProduct(h);
      Vec cand = (params.mat(sp.gate_w[2]) * xrh + params.vec(sp.gate_b[2]))
                     .array()
                     .tanh();
      h = h + z.cwiseProduct(cand - h);
    } else {
      Vec i = sigmoid(params.mat(sp.gate_w[0]) * xh + params.vec(sp.gate_b[0]));
      Vec f = sigmoid(params.mat(sp.gate_w[1]) * xh + params.vec(sp.gate_b[1]));
      Vec g = (params.mat(sp.gate_w[2]) * xh + params.vec(sp.gate_b[2]))
                  .array()
                  .tanh();
      Vec o = sigmoid(params.mat(sp.gate_w[3]) * xh + params.vec(sp.gate_b[3]));
      c = f.cwiseProduct(c) + i.cwiseProduct(g);
      h = o.cwiseProduct(Vec(c.array().tanh()));
    }
    if (t > 0) {
      out.emplace_back(params.mat(sp.readout_w) * h +
                       params.vec(sp.readout_b));
    }
  }
  return out;
}

std::vector<Tape::NodeId> seq_forward(Tape& tape, const SeqEncoderSpec& spec,
                                      const SeqEncoderParams& sp,
                                      const std::vector<Tape::NodeId>& states) {
  if (states.size() < 2) {
    throw WindowError("seq encoder needs at least 2 states");
  }
  const bool gru = spec.cell == RecurrentCell::kGru;
  Tape::NodeId h = tape.constant(Vec::Zero(spec.hidden_dim));
  Tape::NodeId c = h;
  std::vector<Tape::NodeId> out;
  out.reserve(states.size() - 1);
  for (std::size_t t = 0; t < states.size(); ++t) {
    Tape::NodeId xh = tape.concat(states[t], h);
    if (gru) {
      Tape::NodeId r = tape.sigmoid(tape.linear(sp.gate_w[0], sp.gate_b[0], xh));
      Tape::NodeId z = tape.sigmoid(tape.linear(sp.gate_w[1], sp.gate_b[1], xh));
      Tape::NodeId xrh = tape.concat(states[t], tape.hadamard(r, h));
      Tape::NodeId cand =
          tape.tanh(tape.linear(sp.gate_w[2], sp.gate_b[2], xrh));
      h = tape.add(h, tape.hadamard(z, tape.sub(cand, h)));
    } else {
      Tape::NodeId i = tape.sigmoid(tape.linear(sp.gate_w[0], sp.gate_b[0], xh));
      Tape::NodeId f = tape.sigmoid(tape.linear(sp.gate_w[1], sp.gate_b[1], xh));
      Tape::NodeId g = tape.tanh(tape.linear(sp.gate_w[2], sp.gate_b[2], xh));
      Tape::NodeId o = tape.sigmoid(tape.linear(sp.gate_w[3], sp.gate_b[3], xh));
      c = tape.add(tape.hadamard(f, c), tape.hadamard(i, g));
      h = tape.hadamard(o, tape.tanh(c));
    }
    if (t > 0) {
      out.push_back(tape.linear(sp.readout_w, sp.readout_b, h));
    }
  }
  return out;
}

}  // namespace koap::numerics
