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

#ifndef KOAP_BASELINES_DD_HPP_
#define KOAP_BASELINES_DD_HPP_

#include <string>
#include <vector>

#include "koap/numerics/normalizer.hpp"
#include "koap/numerics/seq_encoder.hpp"
#include "koap/policy.hpp"
#include "koap/train_settings.hpp"
#include "koap/trajectory.hpp"

namespace koap::baselines {

struct DdConfig {
  Index state_dim = 2;
  Index action_dim = 2;
  int history = 2;
  int horizon = 12;
  Index hidden = 64;
  numerics::RecurrentCell cell = numerics::RecurrentCell::kGru;
  TrainSettings train;

  numerics::SeqEncoderSpec encoder_spec() const;
  void validate() const;
};

// Purely supervised inverse-dynamics controller: a recurrent encoder over
// the state window regressing the k actions directly. Trained on labeled
// trajectories only; never touches the observation pool.
class DdModel final : public Controller {
 public:
  static DdModel create(const DdConfig& cfg, const numerics::Normalizer& norm,
                        std::uint64_t init_seed);

  Mat infer_actions(const std::vector<Vec>& history,
                    const Mat& plan) const override;
  int horizon() const override { return cfg_.horizon; }
  int history_len() const override { return cfg_.history; }

  const DdConfig& config() const { return cfg_; }
  const numerics::ParamVector& params() const { return params_; }
  numerics::ParamVector& params() { return params_; }
  const numerics::Normalizer& normalizer() const { return norm_; }
  const numerics::SeqEncoderParams& encoder() const { return encoder_; }

  // Mean squared action error over labeled windows (raw action units).
  double action_mse(const std::vector<StateWindow>& windows) const;

  void save(const std::string& path) const;
  static DdModel load(const std::string& path);

  TrainLog train_log;

 private:
  DdModel() = default;
  DdConfig cfg_;
  numerics::SeqEncoderParams encoder_;
  numerics::ParamVector params_;
  numerics::Normalizer norm_;
};

DdModel train_dd_controller(const std::vector<Trajectory>& da,
                            const DdConfig& cfg);

}  // namespace koap::baselines

#endif  // KOAP_BASELINES_DD_HPP_
