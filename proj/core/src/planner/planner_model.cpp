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

#include "koap/planner/planner_model.hpp"

#include <json.hpp>

#include "koap/numerics/checkpoint.hpp"

namespace koap::planner {

DiffusionSpec PlannerConfig::diffusion_spec() const {
  DiffusionSpec s;
  s.cond_dim = (history + 1) * state_dim;
  s.target_dim = horizon * state_dim;
  s.hidden = hidden;
  s.activation = activation;
  s.time_embed_dim = time_embed_dim;
  s.diffusion_steps = diffusion_steps;
  s.beta_min = beta_min;
  s.beta_max = beta_max;
  return s;
}

void PlannerConfig::validate() const {
  if (state_dim < 1) throw ConfigError("planner needs a positive state dim");
  if (history < 0 || horizon < 1) {
    throw ConfigError("planner needs history >= 0 and horizon >= 1");
  }
  diffusion_spec().validate();
}

PlannerModel PlannerModel::create(const PlannerConfig& cfg,
                                  const numerics::Normalizer& norm,
                                  std::uint64_t init_seed) {
  cfg.validate();
  if (norm.dim() != cfg.state_dim) {
    throw ConfigError("planner normalizer dim mismatch");
  }
  PlannerModel m;
  m.cfg_ = cfg;
  m.norm_ = norm;
  m.core_ = DiffusionCore::create(cfg.diffusion_spec(), init_seed);
  return m;
}

Plan PlannerModel::sample_plan(const Vec& current,
                               const std::vector<Vec>& history,
                               Rng& rng) const {
  if (current.size() != cfg_.state_dim) {
    throw ConfigError("sample_plan: current state dim mismatch");
  }
  if (static_cast<int>(history.size()) != cfg_.history) {
    throw ConfigError("sample_plan: expected " + std::to_string(cfg_.history) +
                      " history states");
  }
  Vec cond((cfg_.history + 1) * cfg_.state_dim);
  Index off = 0;
  for (const Vec& h : history) {
    cond.segment(off, cfg_.state_dim) = norm_.normalize(h);
    off += cfg_.state_dim;
  }
  cond.segment(off, cfg_.state_dim) = norm_.normalize(current);

  Vec target = core_.sample_target(cond, rng);

  Plan plan;
  plan.states.resize(cfg_.horizon + 1, cfg_.state_dim);
  plan.states.row(0) = current.transpose();  // conditioning row, verbatim
  for (int j = 0; j < cfg_.horizon; ++j) {
    Vec row = target.segment(static_cast<Index>(j) * cfg_.state_dim,
                             cfg_.state_dim);
    plan.states.row(j + 1) = norm_.denormalize(row).transpose();
  }
  return plan;
}

Plan PlannerModel::sample_plan(const Vec& current,
                               const std::vector<Vec>& history,
                               std::uint64_t seed) const {
  Rng rng(derive_seed(seed, "sample-plan"));
  return sample_plan(current, history, rng);
}

PlannerModel train_planner(const std::vector<Trajectory>& dx,
                           const PlannerConfig& cfg) {
  cfg.validate();
  if (dx.empty()) throw ConfigError("train_planner needs trajectories");

  std::vector<Vec> all_states;
  for (const Trajectory& t : dx) {
    for (const Vec& s : t.states) all_states.push_back(s);
  }
  numerics::Normalizer norm = numerics::Normalizer::fit(all_states);

  std::vector<std::pair<Vec, Vec>> samples;
  const Index d = cfg.state_dim;
  for (const Trajectory& t : dx) {
    for (const StateWindow& w :
         make_windows(t, cfg.history, cfg.horizon, false)) {
      Vec cond((cfg.history + 1) * d);
      Vec target(cfg.horizon * d);
      for (int i = 0; i <= cfg.history; ++i) {
        cond.segment(static_cast<Index>(i) * d, d) =
            norm.normalize(w.states[i]);
      }
      for (int j = 0; j < cfg.horizon; ++j) {
        target.segment(static_cast<Index>(j) * d, d) =
            norm.normalize(w.states[cfg.history + 1 + j]);
      }
      samples.emplace_back(std::move(cond), std::move(target));
    }
  }
  if (samples.empty()) {
    throw ConfigError("no planner windows; trajectories shorter than window");
  }

  PlannerModel model = PlannerModel::create(
      cfg, norm, derive_seed(cfg.train.seed, "planner-init"));
  model.train_log = train_diffusion(model.core(), samples, cfg.train);
  return model;
}

void PlannerModel::save(const std::string& path) const {
  nlohmann::json extra;
  extra["kind"] = "planner";
  extra["config"] = {
      {"state_dim", cfg_.state_dim},
      {"history", cfg_.history},
      {"horizon", cfg_.horizon},
      {"hidden", cfg_.hidden},
      {"activation",
       cfg_.activation == numerics::Activation::kTanh ? "tanh" : "relu"},
      {"time_embed_dim", cfg_.time_embed_dim},
      {"diffusion_steps", cfg_.diffusion_steps},
      {"beta_min", cfg_.beta_min},
      {"beta_max", cfg_.beta_max},
  };
  extra["normalizer"] = {
      {"mean", std::vector<double>(norm_.mean.data(),
                                   norm_.mean.data() + norm_.mean.size())},
      {"std", std::vector<double>(norm_.std.data(),
                                  norm_.std.data() + norm_.std.size())},
  };
  numerics::save_checkpoint(path, core_.params(), extra.dump());
}

PlannerModel PlannerModel::load(const std::string& path) {
  numerics::Checkpoint ck = numerics::load_checkpoint(path);
  nlohmann::json extra = nlohmann::json::parse(ck.extra_json);
  if (extra.at("kind") != "planner") {
    throw OrchestrationError("checkpoint at '" + path + "' is not a planner");
  }
  const auto& jc = extra.at("config");
  PlannerConfig cfg;
  cfg.state_dim = jc.at("state_dim");
  cfg.history = jc.at("history");
  cfg.horizon = jc.at("horizon");
  cfg.hidden = jc.at("hidden").get<std::vector<Index>>();
  cfg.activation = jc.at("activation") == "tanh"
                       ? numerics::Activation::kTanh
                       : numerics::Activation::kRelu;
  cfg.time_embed_dim = jc.at("time_embed_dim");
  cfg.diffusion_steps = jc.at("diffusion_steps");
  cfg.beta_min = jc.at("beta_min");
  cfg.beta_max = jc.at("beta_max");

  const auto& jn = extra.at("normalizer");
  numerics::Normalizer norm;
  auto mean = jn.at("mean").get<std::vector<double>>();
  auto std_ = jn.at("std").get<std::vector<double>>();
  norm.mean = Eigen::Map<const Vec>(mean.data(), mean.size());
  norm.std = Eigen::Map<const Vec>(std_.data(), std_.size());

  PlannerModel model = create(cfg, norm, 0);
  if (model.core_.params().size() != ck.params.size()) {
    throw OrchestrationError("planner checkpoint layout mismatch");
  }
  model.core_.params().values() = ck.params.values();
  return model;
}

}  // namespace koap::planner
