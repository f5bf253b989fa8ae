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

#ifndef KOAP_ENVS_ENV_HPP_
#define KOAP_ENVS_ENV_HPP_

#include "koap/common.hpp"

namespace koap::envs {

enum class EpisodeStatus { kRunning, kSuccess, kCollision, kTimeout };

inline const char* to_string(EpisodeStatus s) {
  switch (s) {
    case EpisodeStatus::kRunning: return "running";
    case EpisodeStatus::kSuccess: return "success";
    case EpisodeStatus::kCollision: return "collision";
    case EpisodeStatus::kTimeout: return "timeout";
  }
  return "unknown";
}

// Minimal episodic environment surface consumed by the rollout loop.
// Environments are small value objects; independent episodes run on
// independent copies.
class Env {
 public:
  virtual ~Env() = default;
  virtual Vec reset(std::uint64_t seed) = 0;
  virtual Vec step(const Vec& action) = 0;
  virtual EpisodeStatus status() const = 0;
  virtual Index state_dim() const = 0;
  virtual Index action_dim() const = 0;
  virtual int max_steps() const = 0;
  virtual int steps_taken() const = 0;
};

}  // namespace koap::envs

#endif  // KOAP_ENVS_ENV_HPP_
