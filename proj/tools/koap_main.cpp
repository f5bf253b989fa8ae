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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "koap/harness/matrix.hpp"

namespace {

using namespace koap;

harness::HarnessConfig config_from(const std::string& path) {
  return harness::load_config(path);
}

harness::DatasetBundle bundle_for_level(const harness::HarnessConfig& cfg,
                                        const std::string& bundle_path,
                                        int level) {
  harness::HarnessConfig c = cfg;
  std::vector<double> fractions = c.dataset.fractions;
  std::uint64_t seed = c.dataset.seed;
  std::string pool_path = bundle_path;

  // A bundle manifest carries the pool path and split parameters; a raw
  // trajectory file falls back to the config's dataset section.
  if (bundle_path.size() > 5 &&
      bundle_path.substr(bundle_path.size() - 5) == ".json") {
    std::ifstream in(bundle_path);
    if (!in) throw OrchestrationError("cannot read bundle '" + bundle_path + "'");
    nlohmann::json j = nlohmann::json::parse(in);
    pool_path = j.at("pool").get<std::string>();
    if (j.contains("fractions")) {
      fractions = j["fractions"].get<std::vector<double>>();
    }
    seed = j.value("seed", seed);
  }
  std::vector<Trajectory> pool = load_trajectories(pool_path);
  auto bundles = harness::build_levels(pool, fractions, seed);
  if (level < 1 || level > static_cast<int>(bundles.size())) {
    throw ConfigError("level " + std::to_string(level) + " out of range");
  }
  return bundles[level - 1];
}

int cmd_gen_data(const std::string& env_id, int n_traj, std::uint64_t seed,
                 const std::string& out, double waypoint_noise, double gain) {
  harness::HarnessConfig cfg = harness::HarnessConfig::defaults();
  cfg.env.id = env_id;
  cfg.dataset.pool_size = n_traj;
  cfg.dataset.seed = seed;
  cfg.dataset.expert_waypoint_noise = waypoint_noise;
  cfg.dataset.expert_gain = gain;
  cfg = harness::apply_seed_override(cfg);

  std::vector<Trajectory> pool = harness::generate_pool(cfg);
  save_trajectories(out, pool);

  nlohmann::json manifest = {{"pool", out},
                             {"fractions", cfg.dataset.fractions},
                             {"seed", cfg.dataset.seed},
                             {"env", env_id}};
  std::ofstream mf(out + ".bundle.json");
  mf << manifest.dump(2) << "\n";
  std::printf("wrote %zu trajectories to %s\n", pool.size(), out.c_str());
  return 0;
}

int cmd_train_planner(const std::string& data, const std::string& out,
                      const std::string& config, std::uint64_t seed) {
  harness::HarnessConfig cfg = config_from(config);
  std::vector<Trajectory> trajs = load_trajectories(data);
  std::vector<Trajectory> dx;
  dx.reserve(trajs.size());
  for (const Trajectory& t : trajs) dx.push_back(t.stripped());
  planner::PlannerConfig pc = cfg.planner;
  pc.train.seed = derive_seed(seed, "planner");
  planner::PlannerModel model = planner::train_planner(dx, pc);
  model.save(out);
  std::printf("planner trained on %zu trajectories -> %s\n", dx.size(),
              out.c_str());
  return 0;
}

int cmd_train_controller(const std::string& method, const std::string& bundle,
                         int level, const std::string& planner_path,
                         const std::string& out, const std::string& config,
                         std::uint64_t seed) {
  harness::HarnessConfig cfg = config_from(config);
  harness::DatasetBundle b = bundle_for_level(cfg, bundle, level);

  std::shared_ptr<const planner::PlannerModel> planner_model;
  if (baselines::method_needs_planner(method)) {
    if (planner_path.empty()) {
      throw OrchestrationError("method '" + method + "' needs --planner");
    }
    planner_model = std::make_shared<planner::PlannerModel>(
        planner::PlannerModel::load(planner_path));
  }
  baselines::TrainedMethod trained = baselines::train_method(
      method, b.dx, b.da, planner_model, cfg.methods, derive_seed(seed, method));
  trained.save(out);
  std::printf("%s controller (level %d, |labeled|=%zu) -> %s\n",
              method.c_str(), level, b.da.size(), out.c_str());
  return 0;
}

int cmd_evaluate(const std::string& method, const std::string& bundle,
                 int level, const std::string& planner_path,
                 const std::string& controller_path, int episodes,
                 const std::string& seeds_csv, const std::string& out_dir,
                 const std::string& config) {
  harness::HarnessConfig cfg = config_from(config);
  cfg.rollout.episodes = episodes;
  if (!seeds_csv.empty()) {
    cfg.rollout.seeds.clear();
    std::size_t pos = 0;
    while (pos < seeds_csv.size()) {
      std::size_t comma = seeds_csv.find(',', pos);
      if (comma == std::string::npos) comma = seeds_csv.size();
      cfg.rollout.seeds.push_back(
          std::strtoull(seeds_csv.substr(pos, comma - pos).c_str(), nullptr, 10));
      pos = comma + 1;
    }
  }
  harness::DatasetBundle b = bundle_for_level(cfg, bundle, level);

  std::filesystem::create_directories(out_dir);
  harness::EvalResult result;
  if (!controller_path.empty()) {
    // Evaluate a fixed checkpoint across seeds.
    std::shared_ptr<const planner::PlannerModel> planner_model;
    if (!planner_path.empty()) {
      planner_model = std::make_shared<planner::PlannerModel>(
          planner::PlannerModel::load(planner_path));
    }
    std::shared_ptr<ActionPlanner> policy =
        baselines::load_method(controller_path, planner_model);
    for (std::uint64_t seed : cfg.rollout.seeds) {
      double rate =
          harness::run_episodes(*policy, cfg, seed, method, &result.records);
      result.per_seed.push_back(rate);
    }
    result.mean = harness::mean(result.per_seed);
    result.stddev = harness::sample_std(result.per_seed);
  } else {
    harness::PlannerProvider planners = harness::make_planner_provider(cfg);
    result = harness::evaluate_method(method, b, cfg, planners);
  }

  harness::save_records(out_dir + "/records.jsonl", result.records);
  std::vector<harness::MatrixRow> rows;
  for (std::size_t i = 0; i < result.per_seed.size(); ++i) {
    rows.push_back({method, level, 1.0, cfg.rollout.seeds[i],
                    result.per_seed[i]});
  }
  std::ofstream csv(out_dir + "/metrics.csv");
  csv << harness::format_csv(rows);
  std::printf("%s level %d: success %.3f +/- %.3f over %zu seeds\n",
              method.c_str(), level, result.mean, result.stddev,
              result.per_seed.size());
  return 0;
}

int cmd_run_matrix(const std::string& config) {
  harness::HarnessConfig cfg = config_from(config);
  harness::MatrixResult result = harness::run_matrix(cfg);
  std::printf("matrix: %zu rows, %zu failures -> %s\n", result.rows.size(),
              result.failures.size(), result.csv_path.c_str());
  return result.failures.empty() ? 0 : 1;
}

int cmd_sample_plan(const std::string& planner_path,
                    const std::string& condition_path, std::uint64_t seed,
                    const std::string& out) {
  planner::PlannerModel model = planner::PlannerModel::load(planner_path);
  std::ifstream in(condition_path);
  if (!in) {
    throw OrchestrationError("cannot read conditioning '" + condition_path + "'");
  }
  nlohmann::json j = nlohmann::json::parse(in);
  auto cur = j.at("current").get<std::vector<double>>();
  Vec current = Eigen::Map<const Vec>(cur.data(), cur.size());
  std::vector<Vec> history;
  for (const auto& h : j.at("history")) {
    auto v = h.get<std::vector<double>>();
    history.push_back(Eigen::Map<const Vec>(v.data(), v.size()));
  }
  planner::Plan plan = model.sample_plan(current, history, seed);
  nlohmann::json out_j;
  out_j["states"] = nlohmann::json::array();
  for (Index r = 0; r < plan.states.rows(); ++r) {
    std::vector<double> row(plan.states.cols());
    for (Index c = 0; c < plan.states.cols(); ++c) row[c] = plan.states(r, c);
    out_j["states"].push_back(row);
  }
  if (out.empty()) {
    std::cout << out_j.dump(2) << "\n";
  } else {
    std::ofstream f(out);
    f << out_j.dump(2) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Plan-then-control imitation learning workbench"};
  app.require_subcommand(1);

  std::string env_id = "avoid", out, data, config, bundle, planner_path;
  std::string controller_path, method = "koap", seeds_csv, out_dir = "eval";
  std::string condition_path;
  int n_traj = 500, level = 1, episodes = 20;
  std::uint64_t seed = 7;
  double waypoint_noise = 0.10, gain = 25.0;

  auto* gen = app.add_subcommand("gen-data", "Generate expert demonstrations");
  gen->add_option("--env", env_id, "Environment id (avoid | avoid_po)");
  gen->add_option("--n-traj", n_traj, "Number of demonstrations");
  gen->add_option("--seed", seed, "Dataset seed");
  gen->add_option("--out", out, "Output trajectory file (JSON lines)")
      ->required();
  gen->add_option("--waypoint-noise", waypoint_noise, "Expert waypoint jitter");
  gen->add_option("--gain", gain, "Expert velocity gain");

  auto* tp = app.add_subcommand("train-planner", "Train the state planner");
  tp->add_option("--data", data, "Trajectory file")->required();
  tp->add_option("--out", out, "Planner checkpoint")->required();
  tp->add_option("--config", config, "Config file");
  tp->add_option("--seed", seed, "Training seed");

  auto* tc = app.add_subcommand("train-controller", "Train a controller");
  tc->add_option("--method", method, "Method id")->required();
  tc->add_option("--bundle", bundle, "Bundle manifest or trajectory file")
      ->required();
  tc->add_option("--level", level, "Action-data level (1-based)");
  tc->add_option("--planner", planner_path, "Planner checkpoint");
  tc->add_option("--out", out, "Controller checkpoint")->required();
  tc->add_option("--config", config, "Config file");
  tc->add_option("--seed", seed, "Training seed");

  auto* ev = app.add_subcommand("evaluate", "Closed-loop evaluation");
  ev->add_option("--method", method, "Method id")->required();
  ev->add_option("--bundle", bundle, "Bundle manifest or trajectory file")
      ->required();
  ev->add_option("--level", level, "Action-data level (1-based)");
  ev->add_option("--planner", planner_path, "Planner checkpoint");
  ev->add_option("--controller", controller_path,
                 "Controller checkpoint (trains in-line when omitted)");
  ev->add_option("--episodes", episodes, "Episodes per seed");
  ev->add_option("--seeds", seeds_csv, "Comma-separated seeds");
  ev->add_option("--out-dir", out_dir, "Output directory");
  ev->add_option("--config", config, "Config file");

  auto* rm = app.add_subcommand("run-matrix", "Run the experiment matrix");
  rm->add_option("--config", config, "Config file")->required();

  auto* sp = app.add_subcommand("sample-plan", "Sample a plan from a planner");
  sp->add_option("--planner", planner_path, "Planner checkpoint")->required();
  sp->add_option("--condition", condition_path,
                 "JSON with current state and history")
      ->required();
  sp->add_option("--seed", seed, "Sampling seed");
  sp->add_option("--out", out, "Output file (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      return cmd_gen_data(env_id, n_traj, seed, out, waypoint_noise, gain);
    }
    if (tp->parsed()) return cmd_train_planner(data, out, config, seed);
    if (tc->parsed()) {
      return cmd_train_controller(method, bundle, level, planner_path, out,
                                  config, seed);
    }
    if (ev->parsed()) {
      return cmd_evaluate(method, bundle, level, planner_path, controller_path,
                          episodes, seeds_csv, out_dir, config);
    }
    if (rm->parsed()) return cmd_run_matrix(config);
    if (sp->parsed()) {
      return cmd_sample_plan(planner_path, condition_path, seed, out);
    }
  } catch (const koap::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
