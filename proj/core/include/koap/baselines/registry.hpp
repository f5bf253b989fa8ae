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

#ifndef KOAP_BASELINES_REGISTRY_HPP_
#define KOAP_BASELINES_REGISTRY_HPP_

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "koap/baselines/dd.hpp"
#include "koap/baselines/diffusion_policy.hpp"
#include "koap/baselines/lapo.hpp"
#include "koap/baselines/vae.hpp"
#include "koap/baselines/variants.hpp"
#include "koap/koopman/model.hpp"
#include "koap/policy.hpp"

namespace koap::baselines {

// Koopman-lifted latent-action controller behind the shared surface.
class KoapController final : public Controller {
 public:
  explicit KoapController(koopman::KoapModel model) : model_(std::move(model)) {}
  Mat infer_actions(const std::vector<Vec>& history,
                    const Mat& plan) const override {
    return model_.infer_actions(history, plan);
  }
  int horizon() const override { return model_.config().horizon; }
  int history_len() const override { return model_.config().history; }
  const koopman::KoapModel& model() const { return model_; }

 private:
  koopman::KoapModel model_;
};

struct MethodConfigs {
  koopman::KoapConfig koap;
  DdConfig dd;
  VaeConfig vae;
  LapoConfig lapo;
  DpConfig dp;
};

// Methods register under a string id used by the CLI and config files.
std::vector<std::string> method_ids();
bool is_method(const std::string& id);
// Plan-then-control methods share one state planner per task; the action
// diffusion baseline samples actions directly.
bool method_needs_planner(const std::string& id);
bool method_needs_labels(const std::string& id);

struct TrainedMethod {
  std::shared_ptr<ActionPlanner> policy;
  // Writes the controller (or direct policy) checkpoint.
  std::function<void(const std::string&)> save;
};

TrainedMethod train_method(
    const std::string& id, const std::vector<Trajectory>& dx,
    const std::vector<Trajectory>& da,
    std::shared_ptr<const planner::PlannerModel> planner,
    const MethodConfigs& cfgs, std::uint64_t seed);

// Reconstructs a rollout-ready policy from a controller checkpoint; the
// planner argument is required for plan-then-control checkpoints.
std::shared_ptr<ActionPlanner> load_method(
    const std::string& path,
    std::shared_ptr<const planner::PlannerModel> planner);

}  // namespace koap::baselines

#endif  // KOAP_BASELINES_REGISTRY_HPP_
