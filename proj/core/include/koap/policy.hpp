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

#ifndef KOAP_POLICY_HPP_
#define KOAP_POLICY_HPP_

#include <memory>
#include <vector>

#include "koap/planner/planner_model.hpp"

namespace koap {

// Inverse-dynamics controller surface shared by every plan-then-control
// method: given n history states and a (1+k)-state plan, produce the k
// actions that would realize the plan.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual Mat infer_actions(const std::vector<Vec>& history,
                            const Mat& plan) const = 0;
  virtual int horizon() const = 0;
  virtual int history_len() const = 0;
};

// A full policy: current state + history -> k actions. The rollout loop only
// sees this surface, so plan-then-control stacks and direct action samplers
// are interchangeable.
class ActionPlanner {
 public:
  virtual ~ActionPlanner() = default;
  virtual Mat plan_actions(const Vec& current, const std::vector<Vec>& history,
                           Rng& rng) const = 0;
  virtual int horizon() const = 0;
  virtual int history_len() const = 0;
};

// Samples a future-state plan, then asks the controller for the actions.
class PlanThenControl final : public ActionPlanner {
 public:
  PlanThenControl(std::shared_ptr<const planner::PlannerModel> planner,
                  std::shared_ptr<const Controller> controller);

  Mat plan_actions(const Vec& current, const std::vector<Vec>& history,
                   Rng& rng) const override;
  int horizon() const override { return controller_->horizon(); }
  int history_len() const override { return controller_->history_len(); }

  const planner::PlannerModel& planner() const { return *planner_; }
  const Controller& controller() const { return *controller_; }

 private:
  std::shared_ptr<const planner::PlannerModel> planner_;
  std::shared_ptr<const Controller> controller_;
};

}  // namespace koap

#endif  // KOAP_POLICY_HPP_
