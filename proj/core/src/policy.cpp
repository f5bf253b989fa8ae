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

#include "koap/policy.hpp"

namespace koap {

PlanThenControl::PlanThenControl(
    std::shared_ptr<const planner::PlannerModel> planner,
    std::shared_ptr<const Controller> controller)
    : planner_(std::move(planner)), controller_(std::move(controller)) {
  if (!planner_ || !controller_) {
    throw ConfigError("plan-then-control needs both a planner and controller");
  }
  if (planner_->config().horizon != controller_->horizon() ||
      planner_->config().history != controller_->history_len()) {
    throw ConfigError("planner and controller disagree on window shape");
  }
}

Mat PlanThenControl::plan_actions(const Vec& current,
                                  const std::vector<Vec>& history,
                                  Rng& rng) const {
  planner::Plan plan = planner_->sample_plan(current, history, rng);
  return controller_->infer_actions(history, plan.states);
}

}  // namespace koap
