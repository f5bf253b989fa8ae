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

#ifndef KOAP_HARNESS_ROLLOUT_HPP_
#define KOAP_HARNESS_ROLLOUT_HPP_

#include <string>
#include <vector>

#include "koap/envs/env.hpp"
#include "koap/policy.hpp"

namespace koap::harness {

// Receding-horizon protocol: plan k steps ahead, execute the first `replan`
// actions, replan from the resulting state until the episode ends.
struct RolloutConfig {
  int horizon = 12;
  int replan = 4;
  int history = 2;

  void validate() const {
    if (horizon < 1 || replan < 1 || history < 0) {
      throw ConfigError("rollout config malformed");
    }
    if (replan > horizon) {
      throw ConfigError("replan interval must not exceed the horizon");
    }
  }
};

struct RolloutRecord {
  std::string env_id;
  std::string method_id;
  std::uint64_t seed = 0;
  int episode = 0;
  std::vector<Vec> states;   // observations incl. the initial one
  std::vector<Vec> actions;  // executed actions
  std::vector<int> actions_per_plan;
  int history_len = 0;
  int plan_horizon = 0;
  envs::EpisodeStatus status = envs::EpisodeStatus::kRunning;
  int steps = 0;

  bool success() const { return status == envs::EpisodeStatus::kSuccess; }
};

// One closed-loop episode. History is bootstrapped by replicating the
// initial observation; a plan interrupted by episode end simply discards its
// remaining actions.
RolloutRecord rollout(const ActionPlanner& policy, envs::Env& env,
                      const RolloutConfig& cfg, std::uint64_t seed);

void save_records(const std::string& path,
                  const std::vector<RolloutRecord>& records);

}  // namespace koap::harness

#endif  // KOAP_HARNESS_ROLLOUT_HPP_
