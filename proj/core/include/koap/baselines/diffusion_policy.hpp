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

#ifndef KOAP_BASELINES_DIFFUSION_POLICY_HPP_
#define KOAP_BASELINES_DIFFUSION_POLICY_HPP_

#include <string>
#include <vector>

#include "koap/planner/planner_model.hpp"
#include "koap/policy.hpp"
#include "koap/trajectory.hpp"

namespace koap::baselines {

struct DpConfig {
  Index state_dim = 2;
  Index action_dim = 2;
  int history = 2;
  int horizon = 12;
  std::vector<Index> hidden = {256, 256};
  numerics::Activation activation = numerics::Activation::kRelu;
  Index time_embed_dim = 16;
  int diffusion_steps = 50;
  double beta_min = 1e-4;
  double beta_max = 0.02;
  TrainSettings train;

  planner::DiffusionSpec diffusion_spec() const;
  void validate() const;
};

// Same diffusion machinery as the state planner, but the diffused block
// holds the k future actions; the conditioning block still holds history and
// current state, which never appear in the output.
class DpModel final : public ActionPlanner {
 public:
  static DpModel create(const DpConfig& cfg,
                        const numerics::Normalizer& state_norm,
                        const numerics::Normalizer& action_norm,
                        std::uint64_t init_seed);

  Mat plan_actions(const Vec& current, const std::vector<Vec>& history,
                   Rng& rng) const override;
  int horizon() const override { return cfg_.horizon; }
  int history_len() const override { return cfg_.history; }

  const DpConfig& config() const { return cfg_; }
  planner::DiffusionCore& core() { return core_; }
  const planner::DiffusionCore& core() const { return core_; }

  void save(const std::string& path) const;
  static DpModel load(const std::string& path);

  TrainLog train_log;

 private:
  DpModel() = default;
  DpConfig cfg_;
  numerics::Normalizer state_norm_;
  numerics::Normalizer action_norm_;
  planner::DiffusionCore core_;
};

DpModel train_diffusion_policy(const std::vector<Trajectory>& da,
                               const DpConfig& cfg);

}  // namespace koap::baselines

#endif  // KOAP_BASELINES_DIFFUSION_POLICY_HPP_
