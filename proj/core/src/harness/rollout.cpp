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

#include "koap/harness/rollout.hpp"

#include <fstream>

#include <json.hpp>

namespace koap::harness {

RolloutRecord rollout(const ActionPlanner& policy, envs::Env& env,
                      const RolloutConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (policy.horizon() != cfg.horizon || policy.history_len() != cfg.history) {
    throw ConfigError("policy window does not match rollout config");
  }

  RolloutRecord rec;
  rec.seed = seed;
  rec.history_len = cfg.history;
  rec.plan_horizon = cfg.horizon;

  Vec obs = env.reset(derive_seed(seed, "episode"));
  Rng rng(derive_seed(seed, "policy"));

  std::vector<Vec> history(cfg.history, obs);
  rec.states.push_back(obs);

  while (env.status() == envs::EpisodeStatus::kRunning) {
    Mat plan_actions = policy.plan_actions(obs, history, rng);
    if (plan_actions.rows() != cfg.horizon ||
        plan_actions.cols() != env.action_dim()) {
      throw ConfigError("policy produced a malformed action block");
    }
    int executed = 0;
    for (int i = 0;
         i < cfg.replan && env.status() == envs::EpisodeStatus::kRunning;
         ++i) {
      Vec action = plan_actions.row(i).transpose();
      Vec next = env.step(action);
      if (cfg.history > 0) {
        history.erase(history.begin());
        history.push_back(obs);
      }
      obs = next;
      rec.actions.push_back(action);
      rec.states.push_back(obs);
      ++executed;
    }
    rec.actions_per_plan.push_back(executed);
  }
  rec.status = env.status();
  rec.steps = env.steps_taken();
  return rec;
}

void save_records(const std::string& path,
                  const std::vector<RolloutRecord>& records) {
  std::ofstream out(path);
  if (!out) throw OrchestrationError("cannot write records to '" + path + "'");
  for (const RolloutRecord& r : records) {
    nlohmann::json j;
    j["env"] = r.env_id;
    j["method"] = r.method_id;
    j["seed"] = r.seed;
    j["episode"] = r.episode;
    j["status"] = envs::to_string(r.status);
    j["steps"] = r.steps;
    j["history_len"] = r.history_len;
    j["plan_horizon"] = r.plan_horizon;
    j["actions_per_plan"] = r.actions_per_plan;
    auto states = nlohmann::json::array();
    for (const Vec& s : r.states) {
      states.push_back(std::vector<double>(s.data(), s.data() + s.size()));
    }
    j["states"] = states;
    auto actions = nlohmann::json::array();
    for (const Vec& a : r.actions) {
      actions.push_back(std::vector<double>(a.data(), a.data() + a.size()));
    }
    j["actions"] = actions;
    out << j.dump() << "\n";
  }
}

}  // namespace koap::harness
