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

#include "koap/envs/lti.hpp"

#include <Eigen/Eigenvalues>

namespace koap::envs {

void LtiSystem::validate() const {
  if (A.rows() != A.cols()) throw ConfigError("A must be square");
  if (B.rows() != A.rows()) throw ConfigError("B row count must match A");
  Eigen::EigenSolver<Mat> es(A);
  double rho = es.eigenvalues().cwiseAbs().maxCoeff();
  if (rho > 1.05) {
    throw ConfigError("spectral radius " + std::to_string(rho) +
                      " exceeds 1.05");
  }
}

LtiSystem LtiSystem::example2x1() {
  LtiSystem sys;
  sys.A.resize(2, 2);
  sys.A << 0.90, 0.10, -0.05, 0.95;
  sys.B.resize(2, 1);
  sys.B << 0.5, 1.0;
  return sys;
}

Vec lti_step(const LtiSystem& sys, const Vec& x, const Vec& a) {
  if (x.size() != sys.state_dim() || a.size() != sys.action_dim()) {
    throw ConfigError("lti_step shape mismatch");
  }
  return sys.A * x + sys.B * a;
}

Vec lti_step(const LtiSystem& sys, const Vec& x, const Vec& a, Rng& rng) {
  Vec next = lti_step(sys, x, a);
  if (sys.noise_std > 0.0) {
    std::normal_distribution<double> n(0.0, sys.noise_std);
    for (Index i = 0; i < next.size(); ++i) next[i] += n(rng);
  }
  return next;
}

std::vector<Trajectory> lti_generate(const LtiSystem& sys, int n_traj,
                                     int steps, std::uint64_t seed) {
  if (n_traj < 1 || steps < 1) {
    throw ConfigError("lti_generate needs n_traj, steps >= 1");
  }
  sys.validate();
  std::vector<Trajectory> out;
  out.reserve(n_traj);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int i = 0; i < n_traj; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    Trajectory t;
    t.env = "lti";
    t.seed = seed;
    Vec x(sys.state_dim());
    for (Index d = 0; d < x.size(); ++d) x[d] = 0.5 * gauss(rng);
    t.states.push_back(x);
    for (int s = 0; s < steps; ++s) {
      Vec a(sys.action_dim());
      for (Index d = 0; d < a.size(); ++d) a[d] = gauss(rng);
      x = lti_step(sys, x, a, rng);
      t.actions.push_back(a);
      t.states.push_back(x);
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::pair<Mat, Mat> dmdc_fit(const std::vector<Trajectory>& trajs) {
  if (trajs.empty()) throw OracleError("dmdc_fit needs trajectories");
  const Index nx = trajs.front().state_dim();
  const Index na = trajs.front().action_dim();
  if (na == 0) throw OracleError("dmdc_fit needs action labels");
  std::size_t n = 0;
  for (const Trajectory& t : trajs) n += t.transition_count();
  if (static_cast<Index>(n) < nx + na) {
    throw OracleError("dmdc_fit has too few transitions");
  }
  Mat regressors(n, nx + na);  // rows: [x_t, a_t]
  Mat targets(n, nx);
  Index row = 0;
  for (const Trajectory& t : trajs) {
    t.validate();
    for (std::size_t s = 0; s + 1 < t.states.size(); ++s) {
      regressors.row(row).head(nx) = t.states[s];
      regressors.row(row).tail(na) = t.actions[s];
      targets.row(row) = t.states[s + 1];
      ++row;
    }
  }
  Eigen::ColPivHouseholderQR<Mat> qr(regressors);
  if (qr.rank() < nx + na) {
    throw OracleError("dmdc regressor is rank deficient (rank " +
                      std::to_string(qr.rank()) + ")");
  }
  Mat coeffs = qr.solve(targets);  // (nx+na) x nx
  Mat a_hat = coeffs.topRows(nx).transpose();
  Mat b_hat = coeffs.bottomRows(na).transpose();
  return {a_hat, b_hat};
}

}  // namespace koap::envs
