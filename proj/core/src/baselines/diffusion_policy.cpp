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

#include "koap/baselines/diffusion_policy.hpp"

#include <json.hpp>

#include "koap/numerics/checkpoint.hpp"

namespace koap::baselines {

planner::DiffusionSpec DpConfig::diffusion_spec() const {
  planner::DiffusionSpec s;
  s.cond_dim = static_cast<Index>(history + 1) * state_dim;
  s.target_dim = static_cast<Index>(horizon) * action_dim;
  s.hidden = hidden;
  s.activation = activation;
  s.time_embed_dim = time_embed_dim;
  s.diffusion_steps = diffusion_steps;
  s.beta_min = beta_min;
  s.beta_max = beta_max;
  return s;
}

void DpConfig::validate() const {
  if (state_dim < 1 || action_dim < 1) {
    throw ConfigError("dp config dims must be positive");
  }
  diffusion_spec().validate();
}

DpModel DpModel::create(const DpConfig& cfg,
                        const numerics::Normalizer& state_norm,
                        const numerics::Normalizer& action_norm,
                        std::uint64_t init_seed) {
  cfg.validate();
  DpModel m;
  m.cfg_ = cfg;
  m.state_norm_ = state_norm;
  m.action_norm_ = action_norm;
  m.core_ = planner::DiffusionCore::create(cfg.diffusion_spec(), init_seed);
  return m;
}

Mat DpModel::plan_actions(const Vec& current, const std::vector<Vec>& history,
                          Rng& rng) const {
  if (current.size() != cfg_.state_dim ||
      static_cast<int>(history.size()) != cfg_.history) {
    throw ConfigError("dp plan_actions shape mismatch");
  }
  Vec cond(static_cast<Index>(cfg_.history + 1) * cfg_.state_dim);
  Index off = 0;
  for (const Vec& h : history) {
    cond.segment(off, cfg_.state_dim) = state_norm_.normalize(h);
    off += cfg_.state_dim;
  }
  cond.segment(off, cfg_.state_dim) = state_norm_.normalize(current);
  Vec target = core_.sample_target(cond, rng);
  Mat actions(cfg_.horizon, cfg_.action_dim);
  for (int j = 0; j < cfg_.horizon; ++j) {
    Vec row = target.segment(static_cast<Index>(j) * cfg_.action_dim,
                             cfg_.action_dim);
    actions.row(j) = action_norm_.denormalize(row).transpose();
  }
  return actions;
}

DpModel train_diffusion_policy(const std::vector<Trajectory>& da,
                               const DpConfig& cfg) {
  cfg.validate();
  if (da.empty()) throw LabelError("train_diffusion_policy needs labels");

  std::vector<Vec> states, actions;
  for (const Trajectory& t : da) {
    for (const Vec& s : t.states) states.push_back(s);
    for (const Vec& a : t.actions) actions.push_back(a);
  }
  numerics::Normalizer state_norm = numerics::Normalizer::fit(states);
  numerics::Normalizer action_norm = numerics::Normalizer::fit(actions);

  std::vector<std::pair<Vec, Vec>> samples;
  const Index d = cfg.state_dim;
  const Index a_dim = cfg.action_dim;
  for (const Trajectory& t : da) {
    for (const auto& w : make_windows(t, cfg.history, cfg.horizon, true)) {
      Vec cond(static_cast<Index>(cfg.history + 1) * d);
      for (int i = 0; i <= cfg.history; ++i) {
        cond.segment(static_cast<Index>(i) * d, d) =
            state_norm.normalize(w.states[i]);
      }
      Vec target(static_cast<Index>(cfg.horizon) * a_dim);
      for (int j = 0; j < cfg.horizon; ++j) {
        target.segment(static_cast<Index>(j) * a_dim, a_dim) =
            action_norm.normalize(w.actions[j]);
      }
      samples.emplace_back(std::move(cond), std::move(target));
    }
  }
  if (samples.empty()) throw ConfigError("dp training found no windows");

  DpModel model = DpModel::create(cfg, state_norm, action_norm,
                                  derive_seed(cfg.train.seed, "dp-init"));
  model.train_log = planner::train_diffusion(model.core(), samples, cfg.train);
  return model;
}

namespace {

nlohmann::json norm_to_json(const numerics::Normalizer& n) {
  return {{"mean",
           std::vector<double>(n.mean.data(), n.mean.data() + n.mean.size())},
          {"std",
           std::vector<double>(n.std.data(), n.std.data() + n.std.size())}};
}

numerics::Normalizer norm_from_json(const nlohmann::json& j) {
  numerics::Normalizer n;
  auto mean = j.at("mean").get<std::vector<double>>();
  auto std_ = j.at("std").get<std::vector<double>>();
  n.mean = Eigen::Map<const Vec>(mean.data(), mean.size());
  n.std = Eigen::Map<const Vec>(std_.data(), std_.size());
  return n;
}

}  // namespace

void DpModel::save(const std::string& path) const {
  nlohmann::json extra;
  extra["kind"] = "dp";
  extra["config"] = {
      {"state_dim", cfg_.state_dim},
      {"action_dim", cfg_.action_dim},
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
  extra["state_normalizer"] = norm_to_json(state_norm_);
  extra["action_normalizer"] = norm_to_json(action_norm_);
  numerics::save_checkpoint(path, core_.params(), extra.dump());
}

DpModel DpModel::load(const std::string& path) {
  numerics::Checkpoint ck = numerics::load_checkpoint(path);
  nlohmann::json extra = nlohmann::json::parse(ck.extra_json);
  if (extra.at("kind") != "dp") {
    throw OrchestrationError("checkpoint at '" + path + "' is not a dp model");
  }
  const auto& jc = extra.at("config");
  DpConfig cfg;
  cfg.state_dim = jc.at("state_dim");
  cfg.action_dim = jc.at("action_dim");
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
  DpModel model =
      create(cfg, norm_from_json(extra.at("state_normalizer")),
             norm_from_json(extra.at("action_normalizer")), 0);
  if (model.core_.params().size() != ck.params.size()) {
    throw OrchestrationError("dp checkpoint layout mismatch");
  }
  model.core_.params().values() = ck.params.values();
  return model;
}

}  // namespace koap::baselines
