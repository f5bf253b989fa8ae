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

#include "koap/harness/config.hpp"

#include <cstdlib>
#include <fstream>

#include <json.hpp>

namespace koap::harness {

namespace {

using nlohmann::json;

void read_opt(const json& j, numerics::OptimizerSettings& o) {
  o.lr = j.value("lr", o.lr);
  o.beta1 = j.value("beta1", o.beta1);
  o.beta2 = j.value("beta2", o.beta2);
  o.eps = j.value("eps", o.eps);
  o.weight_decay = j.value("weight_decay", o.weight_decay);
}

void read_train(const json& j, TrainSettings& t) {
  t.epochs = j.value("epochs", t.epochs);
  t.min_steps = j.value("min_steps", t.min_steps);
  t.batch = j.value("batch", t.batch);
  t.batch_labeled = j.value("batch_labeled", t.batch_labeled);
  read_opt(j, t.opt);
}

}  // namespace

HarnessConfig HarnessConfig::defaults() {
  HarnessConfig cfg;

  cfg.planner.state_dim = 2;
  cfg.planner.train.epochs = 24;
  cfg.planner.train.min_steps = 5000;
  cfg.planner.train.batch = 64;
  cfg.planner.train.opt.weight_decay = 0.0;

  auto& koap = cfg.methods.koap;
  koap.state_dim = 2;
  koap.action_dim = 2;
  koap.latent_dim = 8;
  koap.train.epochs = 16;
  koap.train.min_steps = 5000;
  koap.finetune.epochs = 30;
  koap.finetune.min_steps = 1500;
  koap.finetune.batch = 32;
  koap.finetune.opt.lr = 3e-4;

  auto& dd = cfg.methods.dd;
  dd.state_dim = 2;
  dd.action_dim = 2;
  dd.train.epochs = 40;
  dd.train.min_steps = 5000;

  auto& vae = cfg.methods.vae;
  vae.state_dim = 2;
  vae.action_dim = 2;
  vae.stage1.epochs = 16;
  vae.stage1.min_steps = 5000;
  vae.stage2.epochs = 40;
  vae.stage2.min_steps = 3000;

  auto& lapo = cfg.methods.lapo;
  lapo.state_dim = 2;
  lapo.action_dim = 2;
  lapo.stage1.epochs = 16;
  lapo.stage1.min_steps = 5000;
  lapo.stage2.epochs = 40;
  lapo.stage2.min_steps = 3000;

  auto& dp = cfg.methods.dp;
  dp.state_dim = 2;
  dp.action_dim = 2;
  dp.train.epochs = 24;
  dp.train.min_steps = 5000;
  dp.train.opt.weight_decay = 0.0;

  return cfg;
}

envs::AvoidEnvConfig HarnessConfig::env_config() const {
  envs::AvoidEnvConfig ec;
  if (env.id == "avoid_po") {
    ec.obs_noise_std = env.obs_noise_std > 0.0 ? env.obs_noise_std : 0.01;
  } else if (env.id == "avoid") {
    ec.obs_noise_std = env.obs_noise_std;
  } else {
    throw ConfigError("unknown env id '" + env.id + "'");
  }
  return ec;
}

envs::ExpertPolicy HarnessConfig::expert_config() const {
  envs::ExpertPolicy e;
  e.gain = dataset.expert_gain;
  e.waypoint_noise_std = dataset.expert_waypoint_noise;
  return e;
}

HarnessConfig apply_seed_override(HarnessConfig cfg) {
  if (const char* s = std::getenv("KOAP_SEED")) {
    cfg.master_seed = std::strtoull(s, nullptr, 10);
    cfg.dataset.seed = cfg.master_seed;
  }
  return cfg;
}

HarnessConfig load_config(const std::string& path) {
  HarnessConfig cfg = HarnessConfig::defaults();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config '" + path + "'");
    json j = json::parse(in);

    cfg.master_seed = j.value("seed", cfg.master_seed);
    cfg.dataset.seed = cfg.master_seed;

    if (j.contains("env")) {
      const auto& je = j["env"];
      cfg.env.id = je.value("id", cfg.env.id);
      cfg.env.obs_noise_std = je.value("obs_noise_std", cfg.env.obs_noise_std);
    }
    if (j.contains("dataset")) {
      const auto& jd = j["dataset"];
      cfg.dataset.pool_size = jd.value("pool_size", cfg.dataset.pool_size);
      if (jd.contains("fractions")) {
        cfg.dataset.fractions = jd["fractions"].get<std::vector<double>>();
      }
      cfg.dataset.seed = jd.value("seed", cfg.dataset.seed);
      cfg.dataset.expert_gain =
          jd.value("expert_gain", cfg.dataset.expert_gain);
      cfg.dataset.expert_waypoint_noise =
          jd.value("expert_waypoint_noise", cfg.dataset.expert_waypoint_noise);
      cfg.dataset.pool_file = jd.value("pool_file", cfg.dataset.pool_file);
    }
    if (j.contains("planner")) {
      const auto& jp = j["planner"];
      cfg.planner.diffusion_steps =
          jp.value("diffusion_steps", cfg.planner.diffusion_steps);
      cfg.planner.beta_min = jp.value("beta_min", cfg.planner.beta_min);
      cfg.planner.beta_max = jp.value("beta_max", cfg.planner.beta_max);
      if (jp.contains("hidden")) {
        cfg.planner.hidden = jp["hidden"].get<std::vector<Index>>();
      }
      read_train(jp, cfg.planner.train);
    }
    if (j.contains("controller")) {
      const auto& jc = j["controller"];
      auto& koap = cfg.methods.koap;
      koap.latent_dim = jc.value("latent_dim", koap.latent_dim);
      koap.lambda_kpm = jc.value("lambda_kpm", koap.lambda_kpm);
      koap.lambda_action = jc.value("lambda_action", koap.lambda_action);
      if (jc.contains("encoder_hidden")) {
        koap.encoder_hidden =
            jc["encoder_hidden"].get<std::vector<Index>>();
      }
      koap.predictor_hidden =
          jc.value("predictor_hidden", koap.predictor_hidden);
      if (jc.value("cell", std::string("gru")) == "lstm") {
        koap.cell = numerics::RecurrentCell::kLstm;
      }
      read_train(jc, koap.train);
      if (jc.contains("finetune")) read_train(jc["finetune"], koap.finetune);
      cfg.methods.dd.hidden = jc.value("dd_hidden", cfg.methods.dd.hidden);
      read_train(jc, cfg.methods.dd.train);
      if (jc.contains("fsq_levels")) {
        cfg.methods.lapo.fsq.levels =
            jc["fsq_levels"].get<std::vector<int>>();
      }
      cfg.methods.vae.kl_weight =
          jc.value("vae_kl_weight", cfg.methods.vae.kl_weight);
    }
    if (j.contains("rollout")) {
      const auto& jr = j["rollout"];
      cfg.rollout.protocol.horizon =
          jr.value("horizon", cfg.rollout.protocol.horizon);
      cfg.rollout.protocol.replan =
          jr.value("replan", cfg.rollout.protocol.replan);
      cfg.rollout.protocol.history =
          jr.value("history", cfg.rollout.protocol.history);
      cfg.rollout.episodes = jr.value("episodes", cfg.rollout.episodes);
      if (jr.contains("seeds")) {
        cfg.rollout.seeds = jr["seeds"].get<std::vector<std::uint64_t>>();
      }
    }
    if (j.contains("matrix")) {
      const auto& jm = j["matrix"];
      if (jm.contains("methods")) {
        cfg.matrix.methods = jm["methods"].get<std::vector<std::string>>();
      }
      if (jm.contains("levels")) {
        cfg.matrix.levels = jm["levels"].get<std::vector<int>>();
      }
      if (jm.contains("obs_fractions")) {
        cfg.matrix.obs_fractions =
            jm["obs_fractions"].get<std::vector<double>>();
      }
      cfg.matrix.out_dir = jm.value("out_dir", cfg.matrix.out_dir);
      cfg.matrix.jobs = jm.value("jobs", cfg.matrix.jobs);
    }
  }

  // Window geometry is shared by the planner and every controller.
  const auto& proto = cfg.rollout.protocol;
  cfg.planner.history = proto.history;
  cfg.planner.horizon = proto.horizon;
  cfg.methods.koap.history = proto.history;
  cfg.methods.koap.horizon = proto.horizon;
  cfg.methods.dd.history = proto.history;
  cfg.methods.dd.horizon = proto.horizon;
  cfg.methods.vae.history = proto.history;
  cfg.methods.vae.horizon = proto.horizon;
  cfg.methods.lapo.history = proto.history;
  cfg.methods.lapo.horizon = proto.horizon;
  cfg.methods.dp.history = proto.history;
  cfg.methods.dp.horizon = proto.horizon;

  return apply_seed_override(std::move(cfg));
}

std::vector<Trajectory> generate_pool(const HarnessConfig& cfg) {
  if (!cfg.dataset.pool_file.empty()) {
    return load_trajectories(cfg.dataset.pool_file);
  }
  envs::AvoidEnv env(cfg.env_config());
  envs::ExpertPolicy expert = cfg.expert_config();
  std::vector<Trajectory> pool;
  pool.reserve(cfg.dataset.pool_size);
  for (int i = 0; i < cfg.dataset.pool_size; ++i) {
    // Keep the low bit equal to i so the expert mode mixture stays 50/50
    // regardless of the dataset seed.
    std::uint64_t seed =
        (cfg.dataset.seed << 20) + static_cast<std::uint64_t>(i);
    pool.push_back(envs::expert_rollout(env, expert, seed));
  }
  return pool;
}

}  // namespace koap::harness
