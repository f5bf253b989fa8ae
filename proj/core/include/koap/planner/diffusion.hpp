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

#ifndef KOAP_PLANNER_DIFFUSION_HPP_
#define KOAP_PLANNER_DIFFUSION_HPP_

#include <utility>
#include <vector>

#include "koap/numerics/grad.hpp"
#include "koap/numerics/mlp.hpp"
#include "koap/planner/schedule.hpp"
#include "koap/train_settings.hpp"

namespace koap::planner {

// Denoising-diffusion machinery over a flat plan vector split into a
// conditioning block (known rows, re-imposed at every step and masked out of
// the loss) and a target block (the diffused rows). The state planner puts
// history+current in the conditioning block and future states in the target;
// the action-diffusion baseline puts future actions in the target instead.
struct DiffusionSpec {
  Index cond_dim = 0;
  Index target_dim = 0;
  std::vector<Index> hidden = {256, 256};
  numerics::Activation activation = numerics::Activation::kRelu;
  Index time_embed_dim = 16;
  int diffusion_steps = 50;
  double beta_min = 1e-4;
  double beta_max = 0.02;

  Index plan_dim() const { return cond_dim + target_dim; }
  numerics::MlpSpec denoiser_spec() const;
  void validate() const;
};

Vec time_embedding(int step, Index dim);

class DiffusionCore {
 public:
  static DiffusionCore create(const DiffusionSpec& spec,
                              std::uint64_t init_seed);

  const DiffusionSpec& spec() const { return spec_; }
  const NoiseSchedule& schedule() const { return sched_; }
  const numerics::ParamVector& params() const { return params_; }
  numerics::ParamVector& params() { return params_; }

  // Predicted noise over the full plan (cond rows included but unused).
  Vec predict_noise(const Vec& plan, int step) const;

  // Squared-error term predicting `noise` on the target block, given the
  // conditioning block imposed clean and the noisy target. The weight should
  // already include the batch normalization.
  void add_noise_loss(numerics::Tape& tape, const Vec& cond,
                      const Vec& noisy_target, int step, const Vec& noise,
                      double weight) const;

  // Ancestral sampling of the target block given the conditioning block.
  Vec sample_target(const Vec& cond, Rng& rng) const;

 private:
  DiffusionSpec spec_;
  NoiseSchedule sched_;
  numerics::MlpSpec denoiser_spec_;
  numerics::MlpParams denoiser_;
  numerics::ParamVector params_;
};

// Minibatch noise-prediction training shared by the state planner and the
// action-diffusion baseline. Samples are (cond, target) pairs, already
// normalized.
TrainLog train_diffusion(DiffusionCore& core,
                         const std::vector<std::pair<Vec, Vec>>& samples,
                         const TrainSettings& ts);

}  // namespace koap::planner

#endif  // KOAP_PLANNER_DIFFUSION_HPP_
