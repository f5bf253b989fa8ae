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

#include "koap/baselines/registry.hpp"

#include <algorithm>

#include <json.hpp>

#include "koap/numerics/checkpoint.hpp"

namespace koap::baselines {

namespace {

const std::vector<std::string> kMethods = {
    "koap", "dd", "vae", "lapo", "dp", "nonlinear", "pretrain", "relabel"};

class DpPolicyAdapter final : public ActionPlanner {
 public:
  explicit DpPolicyAdapter(DpModel model) : model_(std::move(model)) {}
  Mat plan_actions(const Vec& current, const std::vector<Vec>& history,
                   Rng& rng) const override {
    return model_.plan_actions(current, history, rng);
  }
  int horizon() const override { return model_.horizon(); }
  int history_len() const override { return model_.history_len(); }
  const DpModel& model() const { return model_; }

 private:
  DpModel model_;
};

template <typename Model>
TrainedMethod wrap_controller(
    Model model, std::shared_ptr<const planner::PlannerModel> planner) {
  auto ctrl = std::make_shared<Model>(std::move(model));
  TrainedMethod out;
  out.policy = std::make_shared<PlanThenControl>(std::move(planner), ctrl);
  out.save = [ctrl](const std::string& path) { ctrl->save(path); };
  return out;
}

TrainedMethod wrap_koap(koopman::KoapModel model,
                        std::shared_ptr<const planner::PlannerModel> planner) {
  auto ctrl = std::make_shared<KoapController>(std::move(model));
  TrainedMethod out;
  out.policy = std::make_shared<PlanThenControl>(std::move(planner), ctrl);
  out.save = [ctrl](const std::string& path) { ctrl->model().save(path); };
  return out;
}

}  // namespace

std::vector<std::string> method_ids() { return kMethods; }

bool is_method(const std::string& id) {
  return std::find(kMethods.begin(), kMethods.end(), id) != kMethods.end();
}

bool method_needs_planner(const std::string& id) { return id != "dp"; }

bool method_needs_labels(const std::string& id) {
  return id == "dd" || id == "dp" || id == "relabel";
}

TrainedMethod train_method(
    const std::string& id, const std::vector<Trajectory>& dx,
    const std::vector<Trajectory>& da,
    std::shared_ptr<const planner::PlannerModel> planner,
    const MethodConfigs& cfgs, std::uint64_t seed) {
  if (!is_method(id)) throw ConfigError("unknown method '" + id + "'");
  if (method_needs_planner(id) && !planner) {
    throw OrchestrationError("method '" + id + "' needs a trained planner");
  }
  if (method_needs_labels(id) && da.empty()) {
    throw LabelError("method '" + id + "' needs labeled trajectories");
  }

  if (id == "koap") {
    koopman::KoapConfig cfg = cfgs.koap;
    cfg.train.seed = seed;
    return wrap_koap(koopman::train_koap(dx, da, cfg), planner);
  }
  if (id == "nonlinear") {
    koopman::KoapConfig cfg = cfgs.koap;
    cfg.train.seed = seed;
    return wrap_koap(train_nonlinear_variant(dx, da, cfg), planner);
  }
  if (id == "pretrain") {
    koopman::KoapConfig cfg = cfgs.koap;
    cfg.train.seed = seed;
    cfg.finetune.seed = derive_seed(seed, "finetune");
    return wrap_koap(pretrain_finetune(dx, da, cfg), planner);
  }
  if (id == "dd") {
    DdConfig cfg = cfgs.dd;
    cfg.train.seed = seed;
    return wrap_controller(train_dd_controller(da, cfg), planner);
  }
  if (id == "relabel") {
    DdConfig cfg = cfgs.dd;
    cfg.train.seed = seed;
    auto [relabeled, model] = relabel_and_train(dx, da, cfg);
    return wrap_controller(std::move(model), planner);
  }
  if (id == "vae") {
    VaeConfig cfg = cfgs.vae;
    cfg.stage1.seed = seed;
    cfg.stage2.seed = derive_seed(seed, "stage2");
    return wrap_controller(train_vae_controller(dx, da, cfg), planner);
  }
  if (id == "lapo") {
    LapoConfig cfg = cfgs.lapo;
    cfg.stage1.seed = seed;
    cfg.stage2.seed = derive_seed(seed, "stage2");
    return wrap_controller(train_lapo(dx, da, cfg), planner);
  }
  // dp
  DpConfig cfg = cfgs.dp;
  cfg.train.seed = seed;
  DpModel model = train_diffusion_policy(da, cfg);
  auto adapter = std::make_shared<DpPolicyAdapter>(std::move(model));
  TrainedMethod out;
  out.policy = adapter;
  out.save = [adapter](const std::string& path) {
    adapter->model().save(path);
  };
  return out;
}

std::shared_ptr<ActionPlanner> load_method(
    const std::string& path,
    std::shared_ptr<const planner::PlannerModel> planner) {
  numerics::Checkpoint ck = numerics::load_checkpoint(path);
  std::string kind =
      nlohmann::json::parse(ck.extra_json).at("kind").get<std::string>();
  if (kind == "dp") {
    return std::make_shared<DpPolicyAdapter>(DpModel::load(path));
  }
  if (!planner) {
    throw OrchestrationError("controller checkpoint '" + path +
                             "' needs a planner");
  }
  std::shared_ptr<Controller> ctrl;
  if (kind == "koap") {
    ctrl = std::make_shared<KoapController>(koopman::KoapModel::load(path));
  } else if (kind == "dd") {
    ctrl = std::make_shared<DdModel>(DdModel::load(path));
  } else if (kind == "vae") {
    ctrl = std::make_shared<VaeModel>(VaeModel::load(path));
  } else if (kind == "lapo") {
    ctrl = std::make_shared<LapoModel>(LapoModel::load(path));
  } else {
    throw OrchestrationError("unknown controller kind '" + kind + "'");
  }
  return std::make_shared<PlanThenControl>(std::move(planner), std::move(ctrl));
}

}  // namespace koap::baselines
