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

#ifndef KOAP_NUMERICS_SEQ_ENCODER_HPP_
#define KOAP_NUMERICS_SEQ_ENCODER_HPP_

#include <string>
#include <vector>

#include "koap/common.hpp"
#include "koap/numerics/param_vector.hpp"
#include "koap/numerics/tape.hpp"

namespace koap::numerics {

enum class RecurrentCell { kGru, kLstm };

// Recurrent encoder unrolled over a state window. The cell consumes one
// state per step; a linear readout of the hidden state is emitted after each
// consumed state except the first, so a window of L states yields L-1 output
// vectors, one per consecutive state pair.
struct SeqEncoderSpec {
  Index input_dim = 0;
  Index hidden_dim = 0;
  Index output_dim = 0;
  RecurrentCell cell = RecurrentCell::kGru;

  void validate() const;
};

struct SeqEncoderParams {
  // GRU: gate order r, z, h. LSTM: gate order i, f, g, o.
  std::vector<ParamVector::Segment> gate_w;
  std::vector<ParamVector::Segment> gate_b;
  ParamVector::Segment readout_w;
  ParamVector::Segment readout_b;
};

SeqEncoderParams register_seq_encoder(ParamVector::Builder& builder,
                                      const std::string& prefix,
                                      const SeqEncoderSpec& spec);

void init_seq_encoder(ParamVector& params, const SeqEncoderParams& sp,
                      Rng& rng);

std::vector<Vec> seq_forward(const SeqEncoderSpec& spec,
                             const SeqEncoderParams& sp,
                             const ParamVector& params,
                             const std::vector<Vec>& states);

std::vector<Tape::NodeId> seq_forward(Tape& tape, const SeqEncoderSpec& spec,
                                      const SeqEncoderParams& sp,
                                      const std::vector<Tape::NodeId>& states);

}  // namespace koap::numerics

#endif  // KOAP_NUMERICS_SEQ_ENCODER_HPP_
