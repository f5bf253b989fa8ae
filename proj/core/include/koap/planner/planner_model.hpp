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

#ifndef KOAP_PLANNER_PLANNER_MODEL_HPP_
#define KOAP_PLANNER_PLANNER_MODEL_HPP_

#include <string>
#include <vector>

#include "koap/numerics/normalizer.hpp"
#include "koap/planner/diffusion.hpp"
#include "koap/trajectory.hpp"

namespace koap::planner {

// The current state and k generated future states. The first row is the
// conditioning current state, copied through verbatim.
struct Plan {
  Mat states;  // (1 + k) x state_dim

  Index horizon() const { return states.rows() - 1; }
  Vec future(Index j) const { return states.row(1 + j).transpose(); }
};

struct PlannerConfig {
  Index state_dim = 2;
  int history = 2;  // n
  int horizon = 12; // k
  std::vector<Index> hidden = {256, 256};
  numerics::Activation activation = numerics::Activation::kRelu;
  Index time_embed_dim = 16;
  int diffusion_steps = 50;
  double beta_min = 1e-4;
  double beta_max = 0.02;
  TrainSettings train;

  DiffusionSpec diffusion_spec() const;
  void validate() const;
};

// Generates k future states conditioned on the current state and n past
// states, by ancestral denoising with the conditioning rows re-imposed after
// every step. Trained on observation-only trajectories.
class PlannerModel {
 public:
  static PlannerModel create(const PlannerConfig& cfg,
                             const numerics::Normalizer& norm,
                             std::uint64_t init_seed);

  const PlannerConfig& config() const { return cfg_; }
  const numerics::Normalizer& normalizer() const { return norm_; }
  const DiffusionCore& core() const { return core_; }
  DiffusionCore& core() { return core_; }

  Plan sample_plan(const Vec& current, const std::vector<Vec>& history,
                   Rng& rng) const;
  Plan sample_plan(const Vec& current, const std::vector<Vec>& history,
                   std::uint64_t seed) const;

  void save(const std::string& path) const;
  static PlannerModel load(const std::string& path);

  TrainLog train_log;

 private:
  PlannerModel() = default;
  PlannerConfig cfg_;
  numerics::Normalizer norm_;
  DiffusionCore core_;
};

PlannerModel train_planner(const std::vector<Trajectory>& dx,
                           const PlannerConfig& cfg);

}  // namespace koap::planner

#endif  // KOAP_PLANNER_PLANNER_MODEL_HPP_
