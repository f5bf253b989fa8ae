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

#ifndef KOAP_BASELINES_VAE_HPP_
#define KOAP_BASELINES_VAE_HPP_

#include <string>
#include <vector>

#include "koap/numerics/mlp.hpp"
#include "koap/numerics/normalizer.hpp"
#include "koap/policy.hpp"
#include "koap/train_settings.hpp"
#include "koap/trajectory.hpp"

namespace koap::baselines {

struct VaeConfig {
  Index state_dim = 2;
  Index action_dim = 2;
  int history = 2;
  int horizon = 12;
  Index latent_dim = 8;
  std::vector<Index> hidden = {128};
  double kl_weight = 1e-3;
  TrainSettings stage1;  // autoencoding on observation windows
  TrainSettings stage2;  // action head on labeled windows

  Index window_flat_dim() const {
    return static_cast<Index>(history + 1 + horizon) * state_dim;
  }
  numerics::MlpSpec encoder_spec() const;  // window -> [mu, logvar]
  numerics::MlpSpec decoder_spec() const;  // latent -> window
  void validate() const;
};

// Variational autoencoder over flattened state windows with a linear action
// head trained afterwards on the frozen embedding. Captures what a
// dynamics-free latent buys: stage 1 never sees actions, stage 2 never
// updates the autoencoder.
class VaeModel final : public Controller {
 public:
  static VaeModel create(const VaeConfig& cfg, const numerics::Normalizer& norm,
                         std::uint64_t init_seed);

  Mat infer_actions(const std::vector<Vec>& history,
                    const Mat& plan) const override;
  int horizon() const override { return cfg_.horizon; }
  int history_len() const override { return cfg_.history; }

  // Posterior parameters for a normalized flattened window.
  void encode(const Vec& flat_window, Vec& mu, Vec& logvar) const;
  Vec decode(const Vec& z) const;

  const VaeConfig& config() const { return cfg_; }
  const numerics::ParamVector& params() const { return params_; }
  numerics::ParamVector& params() { return params_; }
  const numerics::Normalizer& normalizer() const { return norm_; }

  Vec flatten_window(const std::vector<Vec>& history, const Mat& plan) const;

  void save(const std::string& path) const;
  static VaeModel load(const std::string& path);

  TrainLog train_log;

 private:
  friend VaeModel train_vae_controller(const std::vector<Trajectory>&,
                                       const std::vector<Trajectory>&,
                                       const VaeConfig&);
  VaeModel() = default;
  VaeConfig cfg_;
  numerics::MlpParams encoder_;
  numerics::MlpParams decoder_;
  numerics::ParamVector::Segment head_w_;
  numerics::ParamVector::Segment head_b_;
  numerics::ParamVector params_;
  numerics::Normalizer norm_;
};

// 0.5 * sum(mu^2 + exp(logvar) - logvar - 1).
double vae_kl(const Vec& mu, const Vec& logvar);

VaeModel train_vae_controller(const std::vector<Trajectory>& dx,
                              const std::vector<Trajectory>& da,
                              const VaeConfig& cfg);

}  // namespace koap::baselines

#endif  // KOAP_BASELINES_VAE_HPP_
