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
#include <fstream>

#include "koap/envs/lti.hpp"
#include "koap/koopman/model.hpp"

using namespace koap;
using namespace koap::koopman;
using numerics::Normalizer;

namespace {

Vec make_vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

// m = state_dim, no hidden layers: encoder and decoder are single affine
// maps that tests can pin to the identity.
KoapConfig tiny_identity_config(Index dim, int history, int horizon) {
  KoapConfig cfg;
  cfg.state_dim = dim;
  cfg.action_dim = 1;
  cfg.latent_dim = dim;
  cfg.history = history;
  cfg.horizon = horizon;
  cfg.encoder_hidden = {};
  cfg.predictor_hidden = 8;
  return cfg;
}

KoapModel identity_model(const KoapConfig& cfg) {
  KoapModel m = KoapModel::create(cfg, Normalizer::identity(cfg.state_dim), 0);
  m.params().values().setZero();
  m.params().mat(m.structure().encoder.w[0]).setIdentity();
  m.params().mat(m.structure().decoder.w[0]).setIdentity();
  m.params().mat(*m.structure().koopman).setIdentity();
  return m;
}

StateWindow window_from(std::vector<Vec> states, int history) {
  StateWindow w;
  w.states = std::move(states);
  w.history = history;
  return w;
}

}  // namespace

TEST_CASE("identity-configured encoder is the identity map") {
  KoapModel m = identity_model(tiny_identity_config(2, 1, 1));
  Vec x = make_vec({0.7, -0.3});
  CHECK((m.encode(x) - x).cwiseAbs().maxCoeff() == 0.0);
  CHECK((m.decode_state(m.encode(x)) - x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("encode output always has the latent dimension") {
  KoapConfig cfg;
  cfg.state_dim = 3;
  cfg.latent_dim = 8;
  KoapModel m = KoapModel::create(cfg, Normalizer::identity(3), 1);
  CHECK(m.encode(make_vec({0.1, 0.2, 0.3})).size() == 8);
  CHECK_THROWS_AS(m.encode(make_vec({0.1})), ConfigError);
}

TEST_CASE("koopman_step identity and hand product") {
  KoapModel m = identity_model(tiny_identity_config(2, 1, 1));
  Vec z = make_vec({0.4, 0.8});
  CHECK((m.koopman_step(z, Vec::Zero(2)) - z).cwiseAbs().maxCoeff() == 0.0);

  auto k = m.params().mat(*m.structure().koopman);
  k(0, 0) = 0.0;
  k(0, 1) = 1.0;
  k(1, 0) = -1.0;
  k(1, 1) = 0.0;
  Vec next = m.koopman_step(make_vec({1.0, 0.0}), make_vec({0.5, 0.0}));
  CHECK(next[0] == doctest::Approx(0.5));
  CHECK(next[1] == doctest::Approx(-1.0));
}

TEST_CASE("koopman_step is exactly linear under random superposition") {
  KoapConfig cfg = tiny_identity_config(3, 1, 1);
  cfg.latent_dim = 3;
  KoapModel m = KoapModel::create(cfg, Normalizer::identity(3), 3);
  Rng rng(99);
  std::normal_distribution<double> g(0.0, 1.0);
  auto k = m.params().mat(*m.structure().koopman);
  for (Index r = 0; r < 3; ++r) {
    for (Index c = 0; c < 3; ++c) k(r, c) = g(rng);
  }
  for (int trial = 0; trial < 50; ++trial) {
    Vec z1(3), z2(3), u1(3), u2(3);
    for (Index i = 0; i < 3; ++i) {
      z1[i] = g(rng);
      z2[i] = g(rng);
      u1[i] = g(rng);
      u2[i] = g(rng);
    }
    double a = g(rng), b = g(rng);
    Vec lhs = m.koopman_step(a * z1 + b * z2, a * u1 + b * u2);
    Vec rhs = a * m.koopman_step(z1, u1) + b * m.koopman_step(z2, u2);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("predict_latent_actions returns one latent per future transition") {
  KoapConfig cfg;
  cfg.state_dim = 2;
  cfg.latent_dim = 8;
  cfg.history = 2;
  cfg.horizon = 12;
  KoapModel m = KoapModel::create(cfg, Normalizer::identity(2), 5);
  StateWindow w = window_from(std::vector<Vec>(15, make_vec({0.1, 0.2})), 2);
  auto latents = m.predict_latent_actions(w);
  REQUIRE(latents.size() == 12);
  for (const Vec& u : latents) CHECK(u.size() == 8);

  StateWindow bad = window_from(std::vector<Vec>(5, make_vec({0.1, 0.2})), 2);
  CHECK_THROWS_AS(m.predict_latent_actions(bad), WindowError);
}

TEST_CASE("decode_action with zero weights is the bias") {
  KoapConfig cfg = tiny_identity_config(2, 1, 1);
  KoapModel m = identity_model(cfg);
  m.params().vec(*m.structure().action_b) = make_vec({0.25});
  for (int i = 0; i < 5; ++i) {
    Vec u = make_vec({static_cast<double>(i), -static_cast<double>(i)});
    CHECK(m.decode_action(u)[0] == doctest::Approx(0.25));
  }
}

TEST_CASE("decode_action satisfies the affine identity") {
  KoapConfig cfg;
  cfg.state_dim = 2;
  cfg.latent_dim = 6;
  cfg.action_dim = 3;
  KoapModel m = KoapModel::create(cfg, Normalizer::identity(2), 8);
  Rng rng(31);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    Vec u1(6), u2(6);
    for (Index i = 0; i < 6; ++i) {
      u1[i] = g(rng);
      u2[i] = g(rng);
    }
    Vec lhs = m.decode_action(u1) + m.decode_action(u2) -
              m.decode_action(Vec::Zero(6));
    Vec rhs = m.decode_action(u1 + u2);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("reconstruction loss is zero for the identity autoencoder") {
  KoapModel m = identity_model(tiny_identity_config(2, 1, 1));
  std::vector<Vec> states = {make_vec({0.1, 0.2}), make_vec({-0.5, 0.9})};
  CHECK(loss_recon(m, states) == doctest::Approx(0.0));
}

TEST_CASE("reconstruction off by a unit vector costs one") {
  KoapModel m = identity_model(tiny_identity_config(2, 1, 1));
  m.params().vec(m.structure().decoder.b[0]) = make_vec({1.0, 0.0});
  std::vector<Vec> states = {make_vec({0.3, -0.4})};
  CHECK(loss_recon(m, states) == doctest::Approx(1.0));
}

TEST_CASE("reconstruction loss ignores batch order") {
  KoapConfig cfg;
  cfg.state_dim = 2;
  cfg.latent_dim = 4;
  KoapModel m = KoapModel::create(cfg, Normalizer::identity(2), 10);
  std::vector<Vec> states = {make_vec({0.1, 0.2}), make_vec({-0.5, 0.9}),
                             make_vec({0.7, 0.7})};
  double a = loss_recon(m, states);
  std::swap(states[0], states[2]);
  double b = loss_recon(m, states);
  CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("dynamics loss vanishes for identity lifting on constant states") {
  KoapConfig cfg = tiny_identity_config(2, 1, 2);
  KoapModel m = identity_model(cfg);  // K = I, f == 0, g = identity
  StateWindow w =
      window_from(std::vector<Vec>(4, make_vec({0.4, -0.1})), 1);
  CHECK(loss_kpm(m, {w}) == doctest::Approx(0.0));
}

TEST_CASE("dynamics loss matches the direct formula on one transition") {
  KoapConfig cfg = tiny_identity_config(1, 0, 1);
  KoapModel m = identity_model(cfg);
  // States 0 -> -0.3 under K = I, f == 0: residual is 0.3.
  StateWindow w = window_from({make_vec({0.0}), make_vec({-0.3})}, 0);
  CHECK(loss_kpm(m, {w}) == doctest::Approx(0.09));
  CHECK(loss_kpm(m, {w}) >= 0.0);
}

TEST_CASE("action loss matches the direct formula and requires labels") {
  KoapConfig cfg = tiny_identity_config(1, 0, 1);
  KoapModel m = identity_model(cfg);
  m.params().vec(*m.structure().action_b) = make_vec({0.5});
  StateWindow w = window_from({make_vec({0.0}), make_vec({0.0})}, 0);
  w.actions = {make_vec({1.0})};
  // Prediction 0.5 vs label 1.0.
  CHECK(loss_action(m, {w}) == doctest::Approx(0.25));

  w.actions[0][0] = 0.5;
  CHECK(loss_action(m, {w}) == doctest::Approx(0.0));

  StateWindow unlabeled = window_from({make_vec({0.0}), make_vec({0.0})}, 0);
  CHECK_THROWS_AS(loss_action(m, {unlabeled}), LabelError);
}

TEST_CASE("total loss equals the weighted sum of its parts") {
  KoapConfig cfg;
  cfg.state_dim = 2;
  cfg.latent_dim = 4;
  cfg.history = 1;
  cfg.horizon = 2;
  cfg.lambda_kpm = 1.7;
  cfg.lambda_action = 3.1;
  KoapModel m = KoapModel::create(cfg, Normalizer::identity(2), 21);

  Rng rng(2);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<StateWindow> windows;
  std::vector<Vec> all_states;
  for (int i = 0; i < 3; ++i) {
    std::vector<Vec> states;
    for (int t = 0; t < 4; ++t) states.push_back(make_vec({g(rng), g(rng)}));
    StateWindow w = window_from(states, 1);
    if (i > 0) w.actions = {make_vec({g(rng)}), make_vec({g(rng)})};
    for (const Vec& s : w.states) all_states.push_back(s);
    windows.push_back(std::move(w));
  }

  // The action term averages over labeled transitions, so the standalone
  // loss on the labeled subset uses the same denominator as the total.
  std::vector<StateWindow> labeled(windows.begin() + 1, windows.end());
  double expected = loss_recon(m, all_states) +
                    cfg.lambda_kpm * loss_kpm(m, windows) +
                    cfg.lambda_action * loss_action(m, labeled);
  CHECK(total_loss(m, windows, cfg) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("total loss drops the action term on unlabeled batches") {
  KoapConfig cfg;
  cfg.state_dim = 2;
  cfg.latent_dim = 4;
  cfg.history = 1;
  cfg.horizon = 2;
  cfg.lambda_kpm = 0.0;
  cfg.lambda_action = 100.0;
  KoapModel m = KoapModel::create(cfg, Normalizer::identity(2), 4);
  StateWindow w = window_from(std::vector<Vec>(4, make_vec({0.2, 0.3})), 1);
  std::vector<Vec> states(w.states);
  CHECK(total_loss(m, {w}, cfg) == doctest::Approx(loss_recon(m, states)));

  cfg.lambda_kpm = 2.0;
  CHECK(total_loss(m, {w}, cfg) ==
        doctest::Approx(loss_recon(m, states) + 2.0 * loss_kpm(m, {w})));
}

TEST_CASE("koap total loss passes finite differences on a toy batch") {
  KoapConfig cfg;
  cfg.state_dim = 2;
  cfg.latent_dim = 4;
  cfg.history = 1;
  cfg.horizon = 2;
  cfg.encoder_hidden = {8};
  cfg.predictor_hidden = 8;
  KoapModel m = KoapModel::create(cfg, Normalizer::identity(2), 77);

  Rng rng(7);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<StateWindow> windows;
  for (int i = 0; i < 3; ++i) {
    std::vector<Vec> states;
    for (int t = 0; t < 4; ++t) states.push_back(make_vec({g(rng), g(rng)}));
    StateWindow w = window_from(states, 1);
    if (i != 1) w.actions = {make_vec({g(rng)}), make_vec({g(rng)})};
    windows.push_back(normalize_window(m.normalizer(), w));
  }
  std::vector<const StateWindow*> ptrs;
  for (const auto& w : windows) ptrs.push_back(&w);

  auto builder = [&](numerics::Tape& t) {
    add_koap_loss(t, cfg, m.structure(), ptrs, 1.0, 1.3, 2.5);
  };
  CHECK(numerics::grad_check(builder, m.params(), 1e-4) <= 1e-3);
}

TEST_CASE("nonlinear-dynamics variant loss passes finite differences") {
  KoapConfig cfg;
  cfg.state_dim = 2;
  cfg.latent_dim = 4;
  cfg.history = 1;
  cfg.horizon = 2;
  cfg.encoder_hidden = {8};
  cfg.predictor_hidden = 8;
  cfg.dynamics = DynamicsKind::kMlp;
  cfg.dynamics_hidden = {8};
  cfg.action_decoder = ActionDecoderKind::kMlp;
  cfg.action_decoder_hidden = {8};
  KoapModel m = KoapModel::create(cfg, Normalizer::identity(2), 78);
  CHECK_THROWS_AS(m.koopman_step(Vec::Zero(4), Vec::Zero(4)), ConfigError);

  Rng rng(8);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Vec> states;
  for (int t = 0; t < 4; ++t) states.push_back(make_vec({g(rng), g(rng)}));
  StateWindow w = window_from(states, 1);
  w.actions = {make_vec({g(rng)}), make_vec({g(rng)})};
  StateWindow nw = normalize_window(m.normalizer(), w);
  std::vector<const StateWindow*> ptrs = {&nw};
  auto builder = [&](numerics::Tape& t) {
    add_koap_loss(t, cfg, m.structure(), ptrs, 1.0, 1.0, 1.0);
  };
  CHECK(numerics::grad_check(builder, m.params(), 1e-4) <= 1e-3);
}

TEST_CASE("training on a constant-state system drives latent actions small") {
  KoapConfig cfg;
  cfg.state_dim = 2;
  cfg.latent_dim = 4;
  cfg.history = 1;
  cfg.horizon = 2;
  cfg.encoder_hidden = {16};
  cfg.predictor_hidden = 16;
  cfg.train.epochs = 60;
  cfg.train.min_steps = 600;
  cfg.train.seed = 5;

  // Constant trajectories at several distinct set points.
  Rng rng(15);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Trajectory> dx;
  for (int i = 0; i < 12; ++i) {
    Trajectory t;
    Vec x = make_vec({u(rng), u(rng)});
    for (int s = 0; s < 6; ++s) t.states.push_back(x);
    dx.push_back(std::move(t));
  }
  KoapModel m = train_koap(dx, {}, cfg);

  double u_norm = 0.0, z_norm = 0.0;
  for (const Trajectory& t : dx) {
    StateWindow w = window_from(
        std::vector<Vec>(t.states.begin(), t.states.begin() + 4), 1);
    auto latents = m.predict_latent_actions(w);
    for (const Vec& lu : latents) u_norm += lu.norm();
    z_norm += m.encode(t.states[0]).norm() * latents.size();
  }
  CHECK(u_norm < 0.1 * z_norm);
}

TEST_CASE("training without labels leaves the action decoder at init") {
  LtiSystem sys = LtiSystem::example2x1();
  auto dx = lti_generate(sys, 6, 16, 19);
  for (auto& t : dx) t = t.stripped();

  KoapConfig cfg;
  cfg.state_dim = 2;
  cfg.action_dim = 1;
  cfg.latent_dim = 4;
  cfg.history = 2;
  cfg.horizon = 4;
  cfg.encoder_hidden = {8};
  cfg.predictor_hidden = 8;
  cfg.train.epochs = 2;
  cfg.train.min_steps = 50;
  cfg.train.seed = 3;

  KoapModel trained = train_koap(dx, {}, cfg);
  KoapModel fresh = KoapModel::create(cfg, trained.normalizer(),
                                      derive_seed(cfg.train.seed, "koap-init"));
  auto seg_w = trained.params().segment("act.w");
  auto seg_b = trained.params().segment("act.b");
  CHECK((trained.params().vec(seg_w) - fresh.params().vec(seg_w))
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK((trained.params().vec(seg_b) - fresh.params().vec(seg_b))
            .cwiseAbs()
            .maxCoeff() == 0.0);
  // Everything else moved.
  CHECK((trained.params().values() - fresh.params().values())
            .cwiseAbs()
            .maxCoeff() > 0.0);
}

TEST_CASE("identical seeds and data produce bit-identical checkpoints") {
  LtiSystem sys = LtiSystem::example2x1();
  auto pool = lti_generate(sys, 8, 16, 101);
  std::vector<Trajectory> dx;
  for (const auto& t : pool) dx.push_back(t.stripped());
  std::vector<Trajectory> da(pool.begin(), pool.begin() + 2);

  KoapConfig cfg;
  cfg.state_dim = 2;
  cfg.action_dim = 1;
  cfg.latent_dim = 4;
  cfg.history = 2;
  cfg.horizon = 4;
  cfg.encoder_hidden = {8};
  cfg.predictor_hidden = 8;
  cfg.train.epochs = 3;
  cfg.train.min_steps = 60;
  cfg.train.seed = 123;

  KoapModel a = train_koap(dx, da, cfg);
  KoapModel b = train_koap(dx, da, cfg);
  CHECK((a.params().values() - b.params().values()).cwiseAbs().maxCoeff() ==
        0.0);

  auto pa = std::filesystem::temp_directory_path() / "koap_a.ckpt";
  auto pb = std::filesystem::temp_directory_path() / "koap_b.ckpt";
  a.save(pa.string());
  b.save(pb.string());
  std::ifstream fa(pa, std::ios::binary), fb(pb, std::ios::binary);
  std::string ca((std::istreambuf_iterator<char>(fa)),
                 std::istreambuf_iterator<char>());
  std::string cb((std::istreambuf_iterator<char>(fb)),
                 std::istreambuf_iterator<char>());
  CHECK(ca == cb);

  KoapModel loaded = KoapModel::load(pa.string());
  CHECK((loaded.params().values() - a.params().values())
            .cwiseAbs()
            .maxCoeff() == 0.0);
  Vec x = make_vec({0.2, -0.1});
  CHECK((loaded.encode(x) - a.encode(x)).cwiseAbs().maxCoeff() == 0.0);
  std::filesystem::remove(pa);
  std::filesystem::remove(pb);
}

TEST_CASE("trained model tracks the linear oracle in latent space") {
  LtiSystem sys = LtiSystem::example2x1();
  auto pool = lti_generate(sys, 40, 20, 55);
  std::vector<Trajectory> dx;
  for (const auto& t : pool) dx.push_back(t.stripped());
  std::vector<Trajectory> da(pool.begin(), pool.begin() + 5);
  auto held_out = lti_generate(sys, 10, 20, 56);

  KoapConfig cfg;
  cfg.state_dim = 2;
  cfg.action_dim = 1;
  cfg.latent_dim = 4;
  cfg.history = 2;
  cfg.horizon = 6;
  cfg.encoder_hidden = {32};
  cfg.predictor_hidden = 32;
  cfg.train.epochs = 40;
  cfg.train.min_steps = 2500;
  cfg.train.seed = 9;

  KoapModel m = train_koap(dx, da, cfg);

  // Loss trace is non-increasing over a trailing window.
  const auto& log = m.train_log.epoch_loss;
  REQUIRE(log.size() >= 10);
  double early = 0.0, late = 0.0;
  for (std::size_t i = 0; i < 5; ++i) early += log[i];
  for (std::size_t i = log.size() - 5; i < log.size(); ++i) late += log[i];
  CHECK(late < early);

  // Reference: the best affine one-step latent predictor given the true
  // actions, fitted on the held-out embeddings by least squares.
  std::vector<StateWindow> windows;
  for (const auto& t : held_out) {
    for (auto& w : make_windows(t, cfg.history, cfg.horizon, true)) {
      windows.push_back(std::move(w));
    }
  }
  std::size_t n_trans = 0;
  for (const auto& w : windows) n_trans += cfg.horizon;
  Mat reg(n_trans, cfg.latent_dim + 2);  // [z, a, 1]
  Mat target(n_trans, cfg.latent_dim);
  Index row = 0;
  double model_err = 0.0;
  for (const auto& w : windows) {
    auto latents = m.predict_latent_actions(w);
    for (int j = 0; j < cfg.horizon; ++j) {
      Vec z = m.encode(w.states[cfg.history + j]);
      Vec z_next = m.encode(w.states[cfg.history + j + 1]);
      reg.row(row).head(cfg.latent_dim) = z;
      reg(row, cfg.latent_dim) = w.actions[j][0];
      reg(row, cfg.latent_dim + 1) = 1.0;
      target.row(row) = z_next;
      ++row;
      model_err += (m.koopman_step(z, latents[j]) - z_next).squaredNorm();
    }
  }
  Mat coeffs = reg.colPivHouseholderQr().solve(target);
  double oracle_err = (reg * coeffs - target).squaredNorm();
  model_err /= static_cast<double>(n_trans);
  oracle_err /= static_cast<double>(n_trans);

  MESSAGE("latent one-step mse: model ", model_err, " oracle ", oracle_err);
  CHECK(model_err <= 1.5 * oracle_err);
}

TEST_CASE("infer_actions produces one action per planned transition") {
  KoapConfig cfg;
  cfg.state_dim = 2;
  cfg.action_dim = 2;
  cfg.latent_dim = 8;
  cfg.history = 2;
  cfg.horizon = 12;
  KoapModel m = KoapModel::create(cfg, Normalizer::identity(2), 44);

  std::vector<Vec> history = {make_vec({0.0, 0.0}), make_vec({0.1, 0.0})};
  Mat plan(13, 2);
  for (int r = 0; r < 13; ++r) {
    plan(r, 0) = 0.1 * r;
    plan(r, 1) = 0.0;
  }
  Mat actions = m.infer_actions(history, plan);
  CHECK(actions.rows() == 12);
  CHECK(actions.cols() == 2);
  Mat again = m.infer_actions(history, plan);
  CHECK((actions - again).cwiseAbs().maxCoeff() == 0.0);

  Mat bad_plan(5, 2);
  CHECK_THROWS_AS(m.infer_actions(history, bad_plan), ConfigError);
}
