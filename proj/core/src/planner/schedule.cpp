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

#include "koap/planner/schedule.hpp"

#include <cmath>

namespace koap::planner {

NoiseSchedule NoiseSchedule::linear(int steps, double beta_min,
                                    double beta_max) {
  if (steps < 1) throw ConfigError("schedule needs at least one step");
  NoiseSchedule s;
  s.steps = steps;
  s.betas.resize(steps);
  for (int t = 0; t < steps; ++t) {
    double frac = steps == 1 ? 0.0 : static_cast<double>(t) / (steps - 1);
    s.betas[t] = beta_min + (beta_max - beta_min) * frac;
  }
  s.alphas = 1.0 - s.betas.array();
  s.alpha_bars.resize(steps + 1);
  s.alpha_bars[0] = 1.0;
  for (int t = 1; t <= steps; ++t) {
    s.alpha_bars[t] = s.alpha_bars[t - 1] * s.alphas[t - 1];
  }
  s.validate();
  return s;
}

void NoiseSchedule::validate() const {
  if (steps < 1 || betas.size() != steps || alpha_bars.size() != steps + 1) {
    throw ConfigError("inconsistent noise schedule");
  }
  for (int t = 0; t < steps; ++t) {
    if (betas[t] <= 0.0 || betas[t] >= 1.0) {
      throw ConfigError("betas must lie in (0, 1)");
    }
    if (t > 0 && betas[t] < betas[t - 1]) {
      throw ConfigError("betas must be non-decreasing");
    }
  }
  for (int t = 1; t <= steps; ++t) {
    if (!(alpha_bars[t] > 0.0 && alpha_bars[t] < alpha_bars[t - 1])) {
      throw ConfigError("alpha_bar must be strictly decreasing in (0, 1]");
    }
  }
}

Vec q_sample(const NoiseSchedule& sched, const Vec& x0, int step,
             const Vec& noise) {
  if (step < 0 || step > sched.steps) {
    throw ConfigError("q_sample step out of range");
  }
  if (x0.size() != noise.size()) throw ConfigError("q_sample shape mismatch");
  double ab = sched.alpha_bar(step);
  return std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * noise;
}

Mat q_sample(const NoiseSchedule& sched, const Mat& x0, int step,
             const Mat& noise) {
  if (step < 0 || step > sched.steps) {
    throw ConfigError("q_sample step out of range");
  }
  if (x0.rows() != noise.rows() || x0.cols() != noise.cols()) {
    throw ConfigError("q_sample shape mismatch");
  }
  double ab = sched.alpha_bar(step);
  return std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * noise;
}

}  // namespace koap::planner
