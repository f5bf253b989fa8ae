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

#include "koap/harness/matrix.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <mutex>
#include <tuple>

#include <json.hpp>

namespace koap::harness {

namespace fs = std::filesystem;

namespace {

struct Cell {
  std::string method;
  int level;
  double obs_fraction;
  std::uint64_t seed;
};

std::string frac_tag(double f) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", f);
  return buf;
}

std::string cell_name(const Cell& c) {
  return c.method + "_L" + std::to_string(c.level) + "_f" +
         frac_tag(c.obs_fraction) + "_s" + std::to_string(c.seed);
}

}  // namespace

std::string format_csv(const std::vector<MatrixRow>& rows) {
  std::string out = "method,level,obs_fraction,seed,success\n";
  char buf[160];
  for (const MatrixRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%d,%.4f,%llu,%.6f\n",
                  r.method.c_str(), r.level, r.obs_fraction,
                  static_cast<unsigned long long>(r.seed), r.success);
    out += buf;
  }
  return out;
}

MatrixResult run_matrix(const HarnessConfig& cfg) {
  if (cfg.matrix.methods.empty() || cfg.matrix.levels.empty()) {
    throw ConfigError("matrix needs methods and levels");
  }
  for (const std::string& m : cfg.matrix.methods) {
    if (!baselines::is_method(m)) {
      throw ConfigError("matrix references unknown method '" + m + "'");
    }
  }

  fs::create_directories(cfg.matrix.out_dir);
  fs::create_directories(cfg.matrix.out_dir + "/cells");
  fs::create_directories(cfg.matrix.out_dir + "/records");

  std::vector<Trajectory> pool = generate_pool(cfg);
  std::vector<DatasetBundle> bundles =
      build_levels(pool, cfg.dataset.fractions, cfg.dataset.seed);
  for (int level : cfg.matrix.levels) {
    if (level < 1 || level > static_cast<int>(bundles.size())) {
      throw ConfigError("matrix level " + std::to_string(level) +
                        " out of range");
    }
  }

  PlannerProvider planners = make_planner_provider(cfg);

  std::vector<Cell> cells;
  for (const std::string& method : cfg.matrix.methods) {
    for (int level : cfg.matrix.levels) {
      for (double frac : cfg.matrix.obs_fractions) {
        for (std::uint64_t seed : cfg.rollout.seeds) {
          cells.push_back({method, level, frac, seed});
        }
      }
    }
  }

  auto run_cell = [&](const Cell& cell) -> std::pair<bool, MatrixRow> {
    DatasetBundle bundle =
        with_obs_fraction(bundles[cell.level - 1], cell.obs_fraction);
    std::shared_ptr<ActionPlanner> policy =
        train_cell_policy(cell.method, bundle, cfg, cell.seed, planners);
    std::vector<RolloutRecord> records;
    double rate = run_episodes(*policy, cfg, cell.seed, cell.method, &records);
    for (auto& r : records) r.seed = cell.seed;
    save_records(cfg.matrix.out_dir + "/records/" + cell_name(cell) + ".jsonl",
                 records);
    MatrixRow row{cell.method, cell.level, cell.obs_fraction, cell.seed, rate};
    return {true, row};
  };

  MatrixResult result;
  std::mutex result_mutex;

  auto process = [&](const Cell& cell) {
    const std::string cell_path =
        cfg.matrix.out_dir + "/cells/" + cell_name(cell) + ".json";
    if (fs::exists(cell_path)) {
      std::ifstream in(cell_path);
      nlohmann::json j = nlohmann::json::parse(in);
      MatrixRow row{cell.method, cell.level, cell.obs_fraction, cell.seed,
                    j.at("success").get<double>()};
      std::lock_guard<std::mutex> lock(result_mutex);
      result.rows.push_back(row);
      return;
    }
    try {
      auto [ok, row] = run_cell(cell);
      nlohmann::json j = {{"method", row.method},
                          {"level", row.level},
                          {"obs_fraction", row.obs_fraction},
                          {"seed", row.seed},
                          {"success", row.success}};
      std::ofstream out(cell_path);
      out << j.dump(2) << "\n";
      std::lock_guard<std::mutex> lock(result_mutex);
      result.rows.push_back(row);
    } catch (const Error& e) {
      std::lock_guard<std::mutex> lock(result_mutex);
      result.failures.push_back({cell.method, cell.level, cell.obs_fraction,
                                 cell.seed, e.what()});
    }
  };

  const int jobs = std::max(1, cfg.matrix.jobs);
  if (jobs == 1) {
    for (const Cell& cell : cells) process(cell);
  } else {
    std::size_t next = 0;
    std::mutex queue_mutex;
    auto worker = [&]() {
      for (;;) {
        std::size_t i;
        {
          std::lock_guard<std::mutex> lock(queue_mutex);
          if (next >= cells.size()) return;
          i = next++;
        }
        process(cells[i]);
      }
    };
    std::vector<std::future<void>> futures;
    for (int w = 0; w < jobs; ++w) {
      futures.push_back(std::async(std::launch::async, worker));
    }
    for (auto& f : futures) f.get();
  }

  // Deterministic merge order: config order for methods, then numeric keys.
  std::map<std::string, std::size_t> method_order;
  for (std::size_t i = 0; i < cfg.matrix.methods.size(); ++i) {
    method_order[cfg.matrix.methods[i]] = i;
  }
  std::sort(result.rows.begin(), result.rows.end(),
            [&](const MatrixRow& a, const MatrixRow& b) {
              auto ka = std::make_tuple(method_order[a.method], a.level,
                                        a.obs_fraction, a.seed);
              auto kb = std::make_tuple(method_order[b.method], b.level,
                                        b.obs_fraction, b.seed);
              return ka < kb;
            });

  result.csv_path = cfg.matrix.out_dir + "/metrics.csv";
  {
    std::ofstream csv(result.csv_path);
    csv << format_csv(result.rows);
  }

  // Aggregate mean and sample std per (method, level, obs fraction).
  nlohmann::json summary = nlohmann::json::array();
  std::map<std::tuple<std::size_t, int, double>, std::vector<double>> groups;
  for (const MatrixRow& r : result.rows) {
    groups[{method_order[r.method], r.level, r.obs_fraction}].push_back(
        r.success);
  }
  for (const auto& [key, vals] : groups) {
    const auto& [mi, level, frac] = key;
    summary.push_back({{"method", cfg.matrix.methods[mi]},
                       {"level", level},
                       {"obs_fraction", frac},
                       {"seeds", vals.size()},
                       {"mean", mean(vals)},
                       {"std", sample_std(vals)}});
  }
  result.summary_path = cfg.matrix.out_dir + "/summary.json";
  {
    std::ofstream out(result.summary_path);
    out << summary.dump(2) << "\n";
  }
  if (!result.failures.empty()) {
    std::ofstream out(cfg.matrix.out_dir + "/failures.jsonl");
    for (const MatrixFailure& f : result.failures) {
      nlohmann::json j = {{"method", f.method},
                          {"level", f.level},
                          {"obs_fraction", f.obs_fraction},
                          {"seed", f.seed},
                          {"error", f.error}};
      out << j.dump() << "\n";
    }
  }
  return result;
}

}  // namespace koap::harness
