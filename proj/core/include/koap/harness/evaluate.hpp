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

#ifndef KOAP_HARNESS_EVALUATE_HPP_
#define KOAP_HARNESS_EVALUATE_HPP_

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "koap/harness/config.hpp"
#include "koap/harness/dataset.hpp"

namespace koap::harness {

double mean(const std::vector<double>& xs);
double sample_std(const std::vector<double>& xs);

// Supplies the shared state planner for a given observation set and seed.
// Plan-then-control methods evaluated at the same (observation set, seed)
// must receive the same planner instance.
using PlannerProvider =
    std::function<std::shared_ptr<const planner::PlannerModel>(
        const DatasetBundle&, std::uint64_t seed)>;

// Trains planners on demand and memoizes them by (pool size, seed);
// thread-safe.
PlannerProvider make_planner_provider(const HarnessConfig& cfg);

// Trains the method's policy for one evaluation seed.
std::shared_ptr<ActionPlanner> train_cell_policy(const std::string& method_id,
                                                 const DatasetBundle& bundle,
                                                 const HarnessConfig& cfg,
                                                 std::uint64_t seed,
                                                 const PlannerProvider& planners);

struct EvalResult {
  std::vector<double> per_seed;  // success fraction per seed
  double mean = 0.0;
  double stddev = 0.0;  // sample std across seeds
  std::vector<RolloutRecord> records;
};

// Per-seed success fraction over cfg.rollout.episodes closed-loop episodes,
// mean and sample std across cfg.rollout.seeds. Policies are trained in-line.
EvalResult evaluate_method(const std::string& method_id,
                           const DatasetBundle& bundle,
                           const HarnessConfig& cfg,
                           const PlannerProvider& planners);

// Episodes for one already-trained policy (one seed).
double run_episodes(const ActionPlanner& policy, const HarnessConfig& cfg,
                    std::uint64_t seed, const std::string& method_id,
                    std::vector<RolloutRecord>* records);

}  // namespace koap::harness

#endif  // KOAP_HARNESS_EVALUATE_HPP_
