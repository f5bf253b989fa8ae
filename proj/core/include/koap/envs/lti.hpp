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

#ifndef KOAP_ENVS_LTI_HPP_
#define KOAP_ENVS_LTI_HPP_

#include <utility>
#include <vector>

#include "koap/common.hpp"
#include "koap/trajectory.hpp"

namespace koap::envs {

// Linear time-invariant system x' = A x + B a (+ noise). Used as the exact
// reference world: every learned quantity can be checked against A and B.
struct LtiSystem {
  Mat A;
  Mat B;
  double noise_std = 0.0;

  Index state_dim() const { return A.rows(); }
  Index action_dim() const { return B.cols(); }
  void validate() const;

  // A small stable 2-state / 1-action default used across tests.
  static LtiSystem example2x1();
};

Vec lti_step(const LtiSystem& sys, const Vec& x, const Vec& a);
Vec lti_step(const LtiSystem& sys, const Vec& x, const Vec& a, Rng& rng);

// Trajectories under i.i.d. standard-normal excitation: full-rank input
// covariance, so the DMDc regression below is identifiable.
std::vector<Trajectory> lti_generate(const LtiSystem& sys, int n_traj,
                                     int steps, std::uint64_t seed);

// Least-squares identification of (A, B) from labeled transitions.
// Throws OracleError when the stacked regressor is rank deficient.
std::pair<Mat, Mat> dmdc_fit(const std::vector<Trajectory>& trajs);

}  // namespace koap::envs

#endif  // KOAP_ENVS_LTI_HPP_
