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

#ifndef KOAP_ENVS_AVOID_HPP_
#define KOAP_ENVS_AVOID_HPP_

#include <vector>

#include "koap/envs/env.hpp"
#include "koap/trajectory.hpp"

namespace koap::envs {

// 2D end-effector navigation across a 1m x 1m table. Two overlapping
// circular obstacles form a band across the middle, leaving exactly two
// corridor classes (above / below). The action is a 2D velocity command,
// clipped to the unit ball; the executed displacement follows a nonlinear
// speed response, so inverse dynamics is not a plain state difference.
// Touching an obstacle ends the episode as a failure; reaching the right
// edge band is a success.
struct AvoidEnvConfig {
  double start_x = 0.05;
  double start_y = 0.5;
  double start_y_jitter = 0.03;
  std::vector<Vec> obstacle_centers;  // defaults set in ctor
  double obstacle_radius = 0.12;
  double goal_x = 0.9;
  double max_speed = 0.05;  // meters per step at full command
  int step_cap = 100;
  double obs_noise_std = 0.0;  // partially-observable variant

  AvoidEnvConfig();
};

class AvoidEnv final : public Env {
 public:
  explicit AvoidEnv(AvoidEnvConfig cfg = AvoidEnvConfig());

  Vec reset(std::uint64_t seed) override;
  Vec step(const Vec& action) override;
  EpisodeStatus status() const override { return status_; }
  Index state_dim() const override { return 2; }
  Index action_dim() const override { return 2; }
  int max_steps() const override { return cfg_.step_cap; }
  int steps_taken() const override { return steps_; }

  const AvoidEnvConfig& config() const { return cfg_; }
  const Vec& true_position() const { return pos_; }

  // Displacement produced by a command at a given position; exposed so
  // tests and scripted policies can use the exact plant response.
  Vec displacement(const Vec& command) const;

  bool in_obstacle(const Vec& p) const;

 private:
  Vec observe(const Vec& p);

  AvoidEnvConfig cfg_;
  Vec pos_;
  EpisodeStatus status_ = EpisodeStatus::kTimeout;
  int steps_ = 0;
  bool live_ = false;
  Rng rng_;
};

enum class ExpertMode { kAbove, kBelow };

inline const char* to_string(ExpertMode m) {
  return m == ExpertMode::kAbove ? "above" : "below";
}

// Scripted waypoint follower. Per-step Gaussian jitter on the tracked
// waypoint is the only stochasticity, so at zero noise both modes succeed
// deterministically.
struct ExpertPolicy {
  ExpertMode mode = ExpertMode::kAbove;
  std::vector<Vec> waypoints;
  double gain = 25.0;
  double waypoint_noise_std = 0.10;

  static ExpertPolicy for_mode(ExpertMode mode, double gain,
                               double waypoint_noise_std);
};

// One full successful demonstration. The mode comes from the seed parity,
// giving a ~50/50 mixture over seeds. Collisions under nonzero noise are
// resampled with fresh randomness (bounded retries). Recorded actions are
// the commands the expert issued.
Trajectory expert_rollout(const AvoidEnv& env_proto, const ExpertPolicy& base,
                          std::uint64_t seed);

}  // namespace koap::envs

#endif  // KOAP_ENVS_AVOID_HPP_
