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

#ifndef KOAP_TRAJECTORY_HPP_
#define KOAP_TRAJECTORY_HPP_

#include <string>
#include <vector>

#include "koap/common.hpp"

namespace koap {

// Time-indexed state sequence with optional per-step action labels.
// actions[t] is the action taken between states[t] and states[t+1], so a
// labeled trajectory has exactly states.size()-1 actions; an unlabeled one
// has none at all.
struct Trajectory {
  std::vector<Vec> states;
  std::vector<Vec> actions;
  std::string env;
  std::uint64_t seed = 0;
  std::string mode;

  bool labeled() const { return !actions.empty(); }
  Index state_dim() const { return states.empty() ? 0 : states.front().size(); }
  Index action_dim() const {
    return actions.empty() ? 0 : actions.front().size();
  }
  std::size_t transition_count() const {
    return states.size() < 2 ? 0 : states.size() - 1;
  }
  void validate() const;

  Trajectory stripped() const {
    Trajectory t = *this;
    t.actions.clear();
    return t;
  }
};

// The window around time t: n history states, the current state, and k
// future states. Labeled windows additionally carry the k actions driving
// the future transitions; unlabeled windows have no action storage.
struct StateWindow {
  std::vector<Vec> states;  // n + 1 + k states, oldest first
  std::vector<Vec> actions; // k actions, or empty
  int history = 0;          // n

  int horizon() const {
    return static_cast<int>(states.size()) - history - 1;
  }
  bool labeled() const { return !actions.empty(); }
  const Vec& current() const { return states[history]; }
  void validate() const;
};

// All windows of a trajectory with layout (n history, current, k future).
// Windows whose history would start before t=0 replicate the first state;
// windows that would cross the trajectory end are discarded.
std::vector<StateWindow> make_windows(const Trajectory& traj, int history,
                                      int horizon, bool with_actions);

// JSON-lines persistence: one object per trajectory,
// {"states": [[...]], "actions": [[...]] | null, "meta": {...}}.
void save_trajectories(const std::string& path,
                       const std::vector<Trajectory>& trajs);
std::vector<Trajectory> load_trajectories(const std::string& path);

}  // namespace koap

#endif  // KOAP_TRAJECTORY_HPP_
