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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "koap/envs/avoid.hpp"
#include "koap/envs/lti.hpp"
#include "koap/trajectory.hpp"

using namespace koap;
using namespace koap::envs;

namespace {

Vec make_vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

}  // namespace

TEST_CASE("lti_step identity case") {
  LtiSystem sys;
  sys.A = Mat::Identity(2, 2);
  sys.B = Mat::Identity(2, 2);
  Vec next = lti_step(sys, make_vec({1.0, 0.0}), make_vec({0.0, 1.0}));
  CHECK(next[0] == doctest::Approx(1.0));
  CHECK(next[1] == doctest::Approx(1.0));
}

TEST_CASE("lti_step with zero dynamics returns the forced response") {
  LtiSystem sys;
  sys.A = Mat::Zero(2, 2);
  sys.B = Mat::Identity(2, 2);
  Vec next = lti_step(sys, make_vec({3.0, -1.0}), make_vec({0.5, 0.25}));
  CHECK(next[0] == doctest::Approx(0.5));
  CHECK(next[1] == doctest::Approx(0.25));
}

TEST_CASE("lti_step rotation matches a hand product") {
  LtiSystem sys;
  sys.A.resize(2, 2);
  sys.A << 0.0, 1.0, -1.0, 0.0;
  sys.B = Mat::Zero(2, 1);
  Vec next = lti_step(sys, make_vec({1.0, 2.0}), make_vec({0.0}));
  CHECK(next[0] == doctest::Approx(2.0));
  CHECK(next[1] == doctest::Approx(-1.0));
}

TEST_CASE("lti generation is seeded, exact, and persistently exciting") {
  LtiSystem sys = LtiSystem::example2x1();
  auto trajs = lti_generate(sys, 5, 20, 42);
  REQUIRE(trajs.size() == 5);

  auto again = lti_generate(sys, 5, 20, 42);
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    for (std::size_t t = 0; t < trajs[i].states.size(); ++t) {
      CHECK((trajs[i].states[t] - again[i].states[t]).cwiseAbs().maxCoeff() ==
            0.0);
    }
  }

  for (const Trajectory& t : trajs) {
    for (std::size_t s = 0; s + 1 < t.states.size(); ++s) {
      Vec expect = lti_step(sys, t.states[s], t.actions[s]);
      CHECK((t.states[s + 1] - expect).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  // Stacked regressor [x; a] has full row rank.
  std::size_t n = 0;
  for (const auto& t : trajs) n += t.transition_count();
  Mat stacked(3, n);
  Index col = 0;
  for (const auto& t : trajs) {
    for (std::size_t s = 0; s + 1 < t.states.size(); ++s) {
      stacked.col(col).head(2) = t.states[s];
      stacked.col(col).tail(1) = t.actions[s];
      ++col;
    }
  }
  Eigen::ColPivHouseholderQR<Mat> qr(stacked.transpose());
  CHECK(qr.rank() == 3);
}

TEST_CASE("dmdc recovers the system from noiseless data") {
  LtiSystem sys = LtiSystem::example2x1();
  auto trajs = lti_generate(sys, 20, 20, 7);
  auto [a_hat, b_hat] = dmdc_fit(trajs);
  CHECK((a_hat - sys.A).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK((b_hat - sys.B).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("dmdc recovers a scalar system") {
  LtiSystem sys;
  sys.A.resize(1, 1);
  sys.A << 0.9;
  sys.B.resize(1, 1);
  sys.B << 1.0;
  auto trajs = lti_generate(sys, 3, 15, 3);
  auto [a_hat, b_hat] = dmdc_fit(trajs);
  CHECK(a_hat(0, 0) == doctest::Approx(0.9).epsilon(1e-9));
  CHECK(b_hat(0, 0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("dmdc error grows monotonically with process noise") {
  LtiSystem sys = LtiSystem::example2x1();
  double prev = -1.0;
  for (double noise : {0.0, 0.01, 0.1}) {
    LtiSystem noisy = sys;
    noisy.noise_std = noise;
    auto trajs = lti_generate(noisy, 50, 20, 11);
    auto [a_hat, b_hat] = dmdc_fit(trajs);
    double err = (a_hat - sys.A).norm() + (b_hat - sys.B).norm();
    CHECK(err > prev);
    prev = err;
  }
}

TEST_CASE("dmdc rejects degenerate regressions") {
  // A single transition cannot identify a 2-state/1-action system.
  LtiSystem sys = LtiSystem::example2x1();
  auto trajs = lti_generate(sys, 1, 1, 0);
  CHECK_THROWS_AS(dmdc_fit(trajs), OracleError);
}

TEST_CASE("avoid env statuses follow the rules") {
  AvoidEnvConfig cfg;
  cfg.start_y_jitter = 0.0;
  AvoidEnv env(cfg);
  env.reset(0);

  SUBCASE("free-space motion keeps running") {
    env.step(make_vec({0.0, 0.5}));
    CHECK(env.status() == EpisodeStatus::kRunning);
  }

  SUBCASE("driving into an obstacle is a collision") {
    AvoidEnvConfig close = cfg;
    close.start_x = 0.5;
    close.start_y = 0.26;  // just below the lower obstacle edge
    AvoidEnv env2(close);
    env2.reset(0);
    env2.step(make_vec({0.0, 1.0}));
    CHECK(env2.status() == EpisodeStatus::kCollision);
    CHECK_THROWS_AS(env2.step(make_vec({0.0, 0.0})), ProtocolError);
  }

  SUBCASE("crossing the goal line is a success") {
    AvoidEnvConfig near = cfg;
    near.start_x = 0.88;
    near.start_y = 0.1;
    AvoidEnv env2(near);
    env2.reset(0);
    env2.step(make_vec({1.0, 0.0}));
    CHECK(env2.status() == EpisodeStatus::kSuccess);
  }

  SUBCASE("standing still times out") {
    for (int i = 0; i < cfg.step_cap; ++i) env.step(make_vec({0.0, 0.0}));
    CHECK(env.status() == EpisodeStatus::kTimeout);
    CHECK(env.steps_taken() == cfg.step_cap);
  }
}

TEST_CASE("avoid env transitions are deterministic functions of state") {
  AvoidEnv a, b;
  a.reset(123);
  b.reset(123);
  Rng rng(5);
  std::normal_distribution<double> g(0.0, 0.5);
  for (int i = 0; i < 30 && a.status() == EpisodeStatus::kRunning; ++i) {
    Vec cmd = make_vec({g(rng), g(rng)});
    Vec oa = a.step(cmd);
    Vec ob = b.step(cmd);
    CHECK((oa - ob).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("noise-free expert succeeds and stays in its corridor") {
  AvoidEnv env;
  ExpertPolicy base;
  base.waypoint_noise_std = 0.0;
  Trajectory t = expert_rollout(env, base, 0);  // even seed: above
  CHECK(t.mode == "above");
  CHECK(t.actions.size() == t.states.size() - 1);
  // Above-mode states stay above the obstacle band once past the approach.
  for (const Vec& s : t.states) {
    if (s[0] > 0.35 && s[0] < 0.65) CHECK(s[1] > 0.72);
  }
}

TEST_CASE("expert succeeds on every seed at zero noise") {
  AvoidEnv env;
  ExpertPolicy base;
  base.waypoint_noise_std = 0.0;
  int above = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Trajectory t = expert_rollout(env, base, seed);
    if (t.mode == "above") ++above;
    CHECK(t.states.size() <= static_cast<std::size_t>(env.max_steps()) + 1);
  }
  CHECK(above == 500);
}

TEST_CASE("noisy expert covers both modes across 100 seeds") {
  AvoidEnv env;
  ExpertPolicy base;  // default noise
  int above = 0, below = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Trajectory t = expert_rollout(env, base, seed);
    (t.mode == "above" ? above : below) += 1;
  }
  CHECK(above >= 30);
  CHECK(below >= 30);
}

TEST_CASE("stripping actions yields a valid observation trajectory") {
  AvoidEnv env;
  ExpertPolicy base;
  Trajectory t = expert_rollout(env, base, 4);
  Trajectory s = t.stripped();
  CHECK_FALSE(s.labeled());
  s.validate();
  CHECK(s.states.size() == t.states.size());
}

TEST_CASE("trajectories round-trip through json lines") {
  AvoidEnv env;
  ExpertPolicy base;
  std::vector<Trajectory> trajs;
  trajs.push_back(expert_rollout(env, base, 0));
  trajs.push_back(expert_rollout(env, base, 1).stripped());

  auto path = std::filesystem::temp_directory_path() / "koap_trajs.jsonl";
  save_trajectories(path.string(), trajs);
  auto loaded = load_trajectories(path.string());
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].labeled());
  CHECK_FALSE(loaded[1].labeled());
  CHECK(loaded[0].mode == trajs[0].mode);
  for (std::size_t i = 0; i < trajs[0].states.size(); ++i) {
    CHECK((loaded[0].states[i] - trajs[0].states[i]).cwiseAbs().maxCoeff() ==
          0.0);
  }
  std::filesystem::remove(path);
}

TEST_CASE("windows replicate the first state and drop incomplete tails") {
  Trajectory t;
  t.states = {make_vec({0.0, 0.0}), make_vec({1.0, 0.0}), make_vec({2.0, 0.0}),
              make_vec({3.0, 0.0}), make_vec({4.0, 0.0})};
  for (int i = 0; i < 4; ++i) t.actions.push_back(make_vec({0.1, 0.0}));

  auto ws = make_windows(t, 2, 2, true);
  // Valid currents: t = 0, 1, 2 (t + k must stay inside the trajectory).
  REQUIRE(ws.size() == 3);
  CHECK(ws[0].states.size() == 5);
  CHECK((ws[0].states[0] - t.states[0]).cwiseAbs().maxCoeff() == 0.0);
  CHECK((ws[0].states[1] - t.states[0]).cwiseAbs().maxCoeff() == 0.0);
  CHECK((ws[1].states[0] - t.states[0]).cwiseAbs().maxCoeff() == 0.0);
  CHECK((ws[1].states[1] - t.states[0]).cwiseAbs().maxCoeff() == 0.0);
  CHECK((ws[2].states[0] - t.states[0]).cwiseAbs().maxCoeff() == 0.0);
  CHECK((ws[2].states[1] - t.states[1]).cwiseAbs().maxCoeff() == 0.0);
  CHECK(ws[2].actions.size() == 2);
  CHECK(ws[2].labeled());
}
