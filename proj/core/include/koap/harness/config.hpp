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

#ifndef KOAP_HARNESS_CONFIG_HPP_
#define KOAP_HARNESS_CONFIG_HPP_

#include <string>
#include <vector>

#include "koap/baselines/registry.hpp"
#include "koap/envs/avoid.hpp"
#include "koap/harness/rollout.hpp"
#include "koap/planner/planner_model.hpp"

namespace koap::harness {

struct EnvSection {
  std::string id = "avoid";  // avoid | avoid_po
  double obs_noise_std = 0.0;
};

struct DatasetSection {
  int pool_size = 500;
  std::vector<double> fractions = {0.02, 0.05, 0.10, 0.25, 0.50};
  std::uint64_t seed = 7;
  double expert_gain = 25.0;
  double expert_waypoint_noise = 0.10;
  std::string pool_file;  // optional: reuse a generated pool
};

struct RolloutSection {
  RolloutConfig protocol;
  int episodes = 20;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5};
};

struct MatrixSection {
  std::vector<std::string> methods = {"koap", "dd"};
  std::vector<int> levels = {1, 5};
  std::vector<double> obs_fractions = {1.0};
  std::string out_dir = "runs/matrix";
  int jobs = 1;
};

struct HarnessConfig {
  std::uint64_t master_seed = 7;
  EnvSection env;
  DatasetSection dataset;
  planner::PlannerConfig planner;
  baselines::MethodConfigs methods;
  RolloutSection rollout;
  MatrixSection matrix;

  // Defaults tuned for the 2D avoidance task.
  static HarnessConfig defaults();

  envs::AvoidEnvConfig env_config() const;
  envs::ExpertPolicy expert_config() const;
};

// Parses the JSON config ({env, dataset, planner, controller, rollout,
// matrix} sections, all optional over the defaults). The KOAP_SEED
// environment variable, when set, overrides the master seed.
HarnessConfig load_config(const std::string& path);
HarnessConfig apply_seed_override(HarnessConfig cfg);

// Scripted-expert demonstration pool (or the configured pool file).
std::vector<Trajectory> generate_pool(const HarnessConfig& cfg);

}  // namespace koap::harness

#endif  // KOAP_HARNESS_CONFIG_HPP_
