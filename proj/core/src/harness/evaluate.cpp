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

#include "koap/harness/evaluate.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace koap::harness {

double mean(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double acc = 0.0;
  for (double x : xs) acc += x;
  return acc / static_cast<double>(xs.size());
}

double sample_std(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double m = mean(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

PlannerProvider make_planner_provider(const HarnessConfig& cfg) {
  auto cache = std::make_shared<
      std::map<std::pair<std::size_t, std::uint64_t>,
               std::shared_ptr<const planner::PlannerModel>>>();
  auto mutex = std::make_shared<std::mutex>();
  planner::PlannerConfig pcfg = cfg.planner;
  return [cache, mutex, pcfg](const DatasetBundle& bundle,
                              std::uint64_t seed)
             -> std::shared_ptr<const planner::PlannerModel> {
    const auto key = std::make_pair(bundle.dx.size(), seed);
    {
      std::lock_guard<std::mutex> lock(*mutex);
      auto it = cache->find(key);
      if (it != cache->end()) return it->second;
    }
    planner::PlannerConfig c = pcfg;
    c.train.seed = derive_seed(seed, "planner");
    auto model = std::make_shared<planner::PlannerModel>(
        planner::train_planner(bundle.dx, c));
    std::lock_guard<std::mutex> lock(*mutex);
    auto [it, inserted] = cache->emplace(key, std::move(model));
    return it->second;
  };
}

std::shared_ptr<ActionPlanner> train_cell_policy(
    const std::string& method_id, const DatasetBundle& bundle,
    const HarnessConfig& cfg, std::uint64_t seed,
    const PlannerProvider& planners) {
  std::shared_ptr<const planner::PlannerModel> planner_model;
  if (baselines::method_needs_planner(method_id)) {
    planner_model = planners(bundle, seed);
  }
  std::uint64_t train_seed = derive_seed(
      seed, method_id + "-L" + std::to_string(bundle.level) + "-n" +
                std::to_string(bundle.dx.size()));
  baselines::TrainedMethod trained = baselines::train_method(
      method_id, bundle.dx, bundle.da, planner_model, cfg.methods, train_seed);
  return trained.policy;
}

double run_episodes(const ActionPlanner& policy, const HarnessConfig& cfg,
                    std::uint64_t seed, const std::string& method_id,
                    std::vector<RolloutRecord>* records) {
  envs::AvoidEnvConfig env_cfg = cfg.env_config();
  int successes = 0;
  for (int e = 0; e < cfg.rollout.episodes; ++e) {
    envs::AvoidEnv env(env_cfg);
    std::uint64_t ep_seed = derive_seed(seed, "ep" + std::to_string(e));
    RolloutRecord rec = rollout(policy, env, cfg.rollout.protocol, ep_seed);
    rec.env_id = cfg.env.id;
    rec.method_id = method_id;
    rec.episode = e;
    if (rec.success()) ++successes;
    if (records) records->push_back(std::move(rec));
  }
  return static_cast<double>(successes) /
         static_cast<double>(cfg.rollout.episodes);
}

EvalResult evaluate_method(const std::string& method_id,
                           const DatasetBundle& bundle,
                           const HarnessConfig& cfg,
                           const PlannerProvider& planners) {
  if (!baselines::is_method(method_id)) {
    throw OrchestrationError("unknown method '" + method_id + "'");
  }
  EvalResult result;
  for (std::uint64_t seed : cfg.rollout.seeds) {
    std::shared_ptr<ActionPlanner> policy =
        train_cell_policy(method_id, bundle, cfg, seed, planners);
    double rate =
        run_episodes(*policy, cfg, seed, method_id, &result.records);
    for (auto it = result.records.end() -
                   static_cast<std::ptrdiff_t>(cfg.rollout.episodes);
         it != result.records.end(); ++it) {
      it->seed = seed;
    }
    result.per_seed.push_back(rate);
  }
  result.mean = mean(result.per_seed);
  result.stddev = sample_std(result.per_seed);
  return result;
}

}  // namespace koap::harness
