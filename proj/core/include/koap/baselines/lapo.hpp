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

#ifndef KOAP_BASELINES_LAPO_HPP_
#define KOAP_BASELINES_LAPO_HPP_

#include <string>
#include <vector>

#include "koap/baselines/fsq.hpp"
#include "koap/numerics/mlp.hpp"
#include "koap/numerics/normalizer.hpp"
#include "koap/numerics/seq_encoder.hpp"
#include "koap/policy.hpp"
#include "koap/train_settings.hpp"
#include "koap/trajectory.hpp"

namespace koap::baselines {

struct LapoConfig {
  Index state_dim = 2;
  Index action_dim = 2;
  int history = 2;
  int horizon = 12;
  Index feature_dim = 16;
  std::vector<Index> feature_hidden = {64};
  Index inverse_hidden = 64;
  std::vector<Index> forward_hidden = {64};
  FsqSpec fsq;
  TrainSettings stage1;
  TrainSettings stage2;

  numerics::MlpSpec feature_spec() const;       // state -> features
  numerics::SeqEncoderSpec inverse_spec() const;  // window -> pre-quant action
  numerics::MlpSpec forward_spec() const;       // (features, code) -> features
  numerics::MlpSpec state_decoder_spec() const; // features -> state
  void validate() const;
};

// Joint forward/inverse dynamics with a finite-scalar-quantization
// bottleneck between them. Stage 1 trains everything but the action head by
// predicting the next state through the quantized latent action; stage 2
// fits the action head on labeled data with the rest frozen.
class LapoModel final : public Controller {
 public:
  static LapoModel create(const LapoConfig& cfg,
                          const numerics::Normalizer& norm,
                          std::uint64_t init_seed);

  Mat infer_actions(const std::vector<Vec>& history,
                    const Mat& plan) const override;
  int horizon() const override { return cfg_.horizon; }
  int history_len() const override { return cfg_.history; }

  // Quantized latent action per future transition of a raw window.
  std::vector<Vec> latent_codes(const StateWindow& window) const;

  const LapoConfig& config() const { return cfg_; }
  const numerics::ParamVector& params() const { return params_; }
  numerics::ParamVector& params() { return params_; }
  const numerics::Normalizer& normalizer() const { return norm_; }

  void save(const std::string& path) const;
  static LapoModel load(const std::string& path);

  TrainLog train_log;

 private:
  friend LapoModel train_lapo(const std::vector<Trajectory>&,
                              const std::vector<Trajectory>&,
                              const LapoConfig&);
  LapoModel() = default;
  std::vector<Vec> pre_quant_codes(const std::vector<Vec>& norm_states) const;

  LapoConfig cfg_;
  numerics::MlpParams features_;
  numerics::SeqEncoderParams inverse_;
  numerics::MlpParams forward_;
  numerics::MlpParams state_decoder_;
  numerics::ParamVector::Segment head_w_;
  numerics::ParamVector::Segment head_b_;
  numerics::ParamVector params_;
  numerics::Normalizer norm_;
};

LapoModel train_lapo(const std::vector<Trajectory>& dx,
                     const std::vector<Trajectory>& da,
                     const LapoConfig& cfg);

}  // namespace koap::baselines

#endif  // KOAP_BASELINES_LAPO_HPP_
