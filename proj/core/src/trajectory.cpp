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

#include "koap/trajectory.hpp"

#include <fstream>

#include <json.hpp>

namespace koap {

namespace {

nlohmann::json vec_to_json(const Vec& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vec vec_from_json(const nlohmann::json& a) {
  Vec v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Index>(i)] = a[i];
  return v;
}

}  // namespace

void Trajectory::validate() const {
  if (states.size() < 2) throw WindowError("trajectory needs >= 2 states");
  for (const Vec& s : states) {
    if (s.size() != states.front().size()) {
      throw ConfigError("trajectory states disagree on dim");
    }
  }
  if (!actions.empty() && actions.size() != states.size() - 1) {
    throw ConfigError("labeled trajectory needs one action per transition");
  }
}

void StateWindow::validate() const {
  if (history < 0 || static_cast<int>(states.size()) < history + 2) {
    throw WindowError("window too short for its history length");
  }
  if (!actions.empty() &&
      static_cast<int>(actions.size()) != horizon()) {
    throw LabelError("labeled window needs one action per future transition");
  }
}

std::vector<StateWindow> make_windows(const Trajectory& traj, int history,
                                      int horizon, bool with_actions) {
  traj.validate();
  if (with_actions && !traj.labeled()) {
    throw LabelError("requested labeled windows from an unlabeled trajectory");
  }
  const int last = static_cast<int>(traj.states.size()) - 1;
  std::vector<StateWindow> out;
  for (int t = 0; t + horizon <= last; ++t) {
    StateWindow w;
    w.history = history;
    w.states.reserve(history + 1 + horizon);
    for (int j = t - history; j <= t + horizon; ++j) {
      w.states.push_back(traj.states[std::max(j, 0)]);
    }
    if (with_actions) {
      w.actions.assign(traj.actions.begin() + t,
                       traj.actions.begin() + t + horizon);
    }
    out.push_back(std::move(w));
  }
  return out;
}

void save_trajectories(const std::string& path,
                       const std::vector<Trajectory>& trajs) {
  std::ofstream out(path);
  if (!out) throw OrchestrationError("cannot write '" + path + "'");
  for (const Trajectory& t : trajs) {
    nlohmann::json j;
    j["states"] = nlohmann::json::array();
    for (const Vec& s : t.states) j["states"].push_back(vec_to_json(s));
    if (t.labeled()) {
      j["actions"] = nlohmann::json::array();
      for (const Vec& a : t.actions) j["actions"].push_back(vec_to_json(a));
    } else {
      j["actions"] = nullptr;
    }
    j["meta"] = {{"env", t.env}, {"seed", t.seed}, {"mode", t.mode}};
    out << j.dump() << "\n";
  }
}

std::vector<Trajectory> load_trajectories(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw OrchestrationError("cannot read '" + path + "'");
  std::vector<Trajectory> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    Trajectory t;
    for (const auto& s : j.at("states")) t.states.push_back(vec_from_json(s));
    if (!j.at("actions").is_null()) {
      for (const auto& a : j.at("actions")) {
        t.actions.push_back(vec_from_json(a));
      }
    }
    const auto& meta = j.at("meta");
    t.env = meta.value("env", "");
    t.seed = meta.value("seed", std::uint64_t{0});
    t.mode = meta.value("mode", "");
    t.validate();
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace koap
