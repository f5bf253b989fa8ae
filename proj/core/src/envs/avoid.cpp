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

#include "koap/envs/avoid.hpp"

#include <cmath>

namespace koap::envs {

namespace {

Vec vec2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

Vec clip_norm(const Vec& v, double max_norm) {
  double n = v.norm();
  if (n <= max_norm || n == 0.0) return v;
  return v * (max_norm / n);
}

// Nonlinear speed response: odd, monotone, fixes 0 and 1.
double speed_response(double s) { return 0.35 * s + 0.65 * s * s * s; }

}  // namespace

AvoidEnvConfig::AvoidEnvConfig() {
  obstacle_centers.push_back(vec2(0.5, 0.40));
  obstacle_centers.push_back(vec2(0.5, 0.60));
}

AvoidEnv::AvoidEnv(AvoidEnvConfig cfg) : cfg_(std::move(cfg)) {
  pos_ = vec2(cfg_.start_x, cfg_.start_y);
}

bool AvoidEnv::in_obstacle(const Vec& p) const {
  for (const Vec& c : cfg_.obstacle_centers) {
    if ((p - c).norm() < cfg_.obstacle_radius) return true;
  }
  return false;
}

Vec AvoidEnv::observe(const Vec& p) {
  if (cfg_.obs_noise_std <= 0.0) return p;
  std::normal_distribution<double> n(0.0, cfg_.obs_noise_std);
  Vec o = p;
  for (Index i = 0; i < o.size(); ++i) o[i] += n(rng_);
  return o;
}

Vec AvoidEnv::reset(std::uint64_t seed) {
  rng_.seed(derive_seed(seed, "avoid-env"));
  std::uniform_real_distribution<double> u(-cfg_.start_y_jitter,
                                           cfg_.start_y_jitter);
  pos_ = vec2(cfg_.start_x, cfg_.start_y + (cfg_.start_y_jitter > 0 ? u(rng_) : 0.0));
  steps_ = 0;
  live_ = true;
  status_ = EpisodeStatus::kRunning;
  return observe(pos_);
}

Vec AvoidEnv::displacement(const Vec& command) const {
  Vec v = clip_norm(command, 1.0);
  double s = v.norm();
  if (s == 0.0) return Vec::Zero(2);
  return (cfg_.max_speed * speed_response(s) / s) * v;
}

Vec AvoidEnv::step(const Vec& action) {
  if (!live_ || status_ != EpisodeStatus::kRunning) {
    throw ProtocolError("step on a finished episode");
  }
  if (action.size() != 2) throw ConfigError("avoid action must be 2-d");
  Vec delta = displacement(action);
  Vec mid = (pos_ + 0.5 * delta).cwiseMax(0.0).cwiseMin(1.0);
  pos_ = (pos_ + delta).cwiseMax(0.0).cwiseMin(1.0);
  steps_ += 1;
  if (in_obstacle(mid) || in_obstacle(pos_)) {
    status_ = EpisodeStatus::kCollision;
  } else if (pos_[0] >= cfg_.goal_x) {
    status_ = EpisodeStatus::kSuccess;
  } else if (steps_ >= cfg_.step_cap) {
    status_ = EpisodeStatus::kTimeout;
  }
  return observe(pos_);
}

ExpertPolicy ExpertPolicy::for_mode(ExpertMode mode, double gain,
                                    double waypoint_noise_std) {
  ExpertPolicy e;
  e.mode = mode;
  e.gain = gain;
  e.waypoint_noise_std = waypoint_noise_std;
  const double y = mode == ExpertMode::kAbove ? 0.85 : 0.15;
  const double y_exit = mode == ExpertMode::kAbove ? 0.72 : 0.28;
  e.waypoints.push_back(vec2(0.33, y));
  e.waypoints.push_back(vec2(0.67, y));
  e.waypoints.push_back(vec2(1.0, y_exit));
  return e;
}

Trajectory expert_rollout(const AvoidEnv& env_proto, const ExpertPolicy& base,
                          std::uint64_t seed) {
  const int kMaxRetries = 50;
  for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
    ExpertPolicy expert = ExpertPolicy::for_mode(
        seed % 2 == 0 ? ExpertMode::kAbove : ExpertMode::kBelow, base.gain,
        base.waypoint_noise_std);
    AvoidEnv env = env_proto;
    std::uint64_t attempt_seed = derive_seed(seed, 1000 + attempt);
    Rng rng(derive_seed(attempt_seed, "expert"));
    std::normal_distribution<double> jitter(0.0, expert.waypoint_noise_std);

    Trajectory traj;
    traj.env = env.config().obs_noise_std > 0 ? "avoid_po" : "avoid";
    traj.seed = seed;
    traj.mode = to_string(expert.mode);
    Vec obs = env.reset(attempt_seed);
    traj.states.push_back(obs);
    std::size_t wp = 0;
    while (env.status() == EpisodeStatus::kRunning) {
      const Vec& pos = env.true_position();
      if (wp + 1 < expert.waypoints.size() &&
          (expert.waypoints[wp] - pos).norm() < 0.05) {
        ++wp;
      }
      Vec target = expert.waypoints[wp];
      if (expert.waypoint_noise_std > 0.0) {
        target = target + vec2(jitter(rng), jitter(rng));
      }
      Vec cmd = clip_norm(expert.gain * (target - pos), 1.0);
      obs = env.step(cmd);
      traj.actions.push_back(cmd);
      traj.states.push_back(obs);
    }
    if (env.status() == EpisodeStatus::kSuccess) return traj;
    if (env.status() == EpisodeStatus::kCollision && base.waypoint_noise_std == 0.0) {
      throw ProtocolError("noise-free expert collided; bad geometry");
    }
  }
  throw ProtocolError("expert failed to produce a successful demo after retries");
}

}  // namespace koap::envs
