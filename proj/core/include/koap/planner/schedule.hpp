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

#ifndef KOAP_PLANNER_SCHEDULE_HPP_
#define KOAP_PLANNER_SCHEDULE_HPP_

#include "koap/common.hpp"

namespace koap::planner {

// Forward-diffusion schedule. alpha_bars has steps+1 entries with
// alpha_bars[0] = 1 (the step-0 convention: no noise).
struct NoiseSchedule {
  int steps = 0;
  Vec betas;       // betas[t-1] is beta_t, t in [1, steps]
  Vec alphas;      // 1 - beta
  Vec alpha_bars;  // cumulative products, alpha_bars[t] for t in [0, steps]

  static NoiseSchedule linear(int steps, double beta_min, double beta_max);
  void validate() const;

  double beta(int t) const { return betas[t - 1]; }
  double alpha(int t) const { return alphas[t - 1]; }
  double alpha_bar(int t) const { return alpha_bars[t]; }
};

// sqrt(alpha_bar_step) * x0 + sqrt(1 - alpha_bar_step) * noise.
// step 0 returns x0 unchanged.
Vec q_sample(const NoiseSchedule& sched, const Vec& x0, int step,
             const Vec& noise);
Mat q_sample(const NoiseSchedule& sched, const Mat& x0, int step,
             const Mat& noise);

}  // namespace koap::planner

#endif  // KOAP_PLANNER_SCHEDULE_HPP_
