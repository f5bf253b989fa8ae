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

#include <set>

#include "koap/baselines/registry.hpp"
#include "koap/envs/lti.hpp"
#include "koap/numerics/grad.hpp"

using namespace koap;
using namespace koap::baselines;
using numerics::Normalizer;

namespace {

Vec make_vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

struct LtiData {
  envs::LtiSystem sys = envs::LtiSystem::example2x1();
  std::vector<Trajectory> pool;
  std::vector<Trajectory> dx;

  explicit LtiData(int n_traj, int steps, std::uint64_t seed) {
    pool = envs::lti_generate(sys, n_traj, steps, seed);
    for (const auto& t : pool) dx.push_back(t.stripped());
  }
  std::vector<Trajectory> da(std::size_t count) const {
    return {pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(count)};
  }
};

std::vector<StateWindow> labeled_windows(const std::vector<Trajectory>& trajs,
                                         int history, int horizon) {
  std::vector<StateWindow> out;
  for (const auto& t : trajs) {
    for (auto& w : make_windows(t, history, horizon, true)) {
      out.push_back(std::move(w));
    }
  }
  return out;
}

double koap_action_mse(const koopman::KoapModel& m,
                       const std::vector<StateWindow>& windows) {
  double acc = 0.0;
  std::size_t n = 0;
  for (const auto& w : windows) {
    std::vector<Vec> history(w.states.begin(),
                             w.states.begin() + m.config().history);
    Mat plan(m.config().horizon + 1, m.config().state_dim);
    for (int r = 0; r <= m.config().horizon; ++r) {
      plan.row(r) = w.states[m.config().history + r].transpose();
    }
    Mat pred = m.infer_actions(history, plan);
    for (int j = 0; j < m.config().horizon; ++j) {
      acc += (pred.row(j).transpose() - w.actions[j]).squaredNorm();
      ++n;
    }
  }
  return acc / static_cast<double>(n);
}

}  // namespace

TEST_CASE("fsq leaves grid points unchanged and is idempotent") {
  FsqSpec spec;
  spec.levels = {3};
  CHECK(fsq_quantize(spec, make_vec({1.0}))[0] == 1.0);
  CHECK(fsq_quantize(spec, make_vec({0.0}))[0] == 0.0);
  CHECK(fsq_quantize(spec, make_vec({-1.0}))[0] == -1.0);

  // Squashed value 0.4 rounds to the nearest grid point, 0.
  CHECK(fsq_quantize(spec, make_vec({0.4}))[0] == 0.0);
  CHECK(fsq_quantize(spec, make_vec({7.3}))[0] == 1.0);  // clamped

  FsqSpec spec3{{5, 5, 4}};
  Rng rng(2);
  std::normal_distribution<double> g(0.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    Vec v = make_vec({g(rng), g(rng), g(rng)});
    Vec q = fsq_quantize(spec3, v);
    Vec qq = fsq_quantize(spec3, q);
    CHECK((q - qq).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("fsq image has exactly the advertised number of codes") {
  FsqSpec spec{{3, 2}};
  CHECK(spec.codebook_size() == 6);
  std::set<long> seen;
  Rng rng(3);
  std::normal_distribution<double> g(0.0, 3.0);
  for (int i = 0; i < 500; ++i) {
    Vec q = fsq_quantize(spec, make_vec({g(rng), g(rng)}));
    seen.insert(fsq_code_index(spec, q));
  }
  CHECK(seen.size() == 6);
  for (long idx : seen) {
    CHECK(idx >= 0);
    CHECK(idx < 6);
  }
}

TEST_CASE("fsq straight-through gradient is the identity") {
  numerics::ParamVector::Builder b;
  auto seg = b.add("v", {3});
  numerics::ParamVector p = b.build();
  p.vec(seg) = make_vec({0.3, -1.2, 0.9});
  FsqSpec spec{{5, 5, 5}};
  auto builder = [&](numerics::Tape& t) {
    t.add_squared_norm(fsq_quantize_st(t, spec, t.param(seg)), 1.0);
  };
  Vec g;
  grad(builder, p, g);
  Vec q = fsq_quantize(spec, p.vec(seg));
  // d/dv ||q||^2 with identity straight-through is 2q.
  CHECK((g - 2.0 * q).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("supervised controller learns the inverse dynamics on lti data") {
  LtiData data(60, 16, 21);
  DdConfig cfg;
  cfg.state_dim = 2;
  cfg.action_dim = 1;
  cfg.history = 2;
  cfg.horizon = 4;
  cfg.hidden = 32;
  cfg.train.epochs = 20;
  cfg.train.min_steps = 2000;
  cfg.train.seed = 3;
  DdModel model = train_dd_controller(data.da(60), cfg);

  auto held_out = envs::lti_generate(data.sys, 8, 16, 22);
  double mse = model.action_mse(labeled_windows(held_out, 2, 4));
  MESSAGE("dd held-out action mse: ", mse);
  CHECK(mse < 0.05);  // actions are unit-variance noise

  CHECK_THROWS_AS(train_dd_controller({}, cfg), LabelError);
}

TEST_CASE("label-scarce supervised controller loses to the lifted one") {
  LtiData data(120, 16, 31);
  auto da = data.da(2);
  auto held_out = envs::lti_generate(data.sys, 10, 16, 32);
  auto held_windows = labeled_windows(held_out, 2, 4);

  DdConfig dd_cfg;
  dd_cfg.state_dim = 2;
  dd_cfg.action_dim = 1;
  dd_cfg.history = 2;
  dd_cfg.horizon = 4;
  dd_cfg.hidden = 32;
  dd_cfg.train.epochs = 20;
  dd_cfg.train.min_steps = 1500;
  dd_cfg.train.seed = 4;
  DdModel dd = train_dd_controller(da, dd_cfg);

  koopman::KoapConfig kc;
  kc.state_dim = 2;
  kc.action_dim = 1;
  kc.latent_dim = 4;
  kc.history = 2;
  kc.horizon = 4;
  kc.encoder_hidden = {32};
  kc.predictor_hidden = 32;
  kc.train.epochs = 20;
  kc.train.min_steps = 2500;
  kc.train.seed = 4;
  koopman::KoapModel koap = koopman::train_koap(data.dx, da, kc);

  double dd_mse = dd.action_mse(held_windows);
  double koap_mse = koap_action_mse(koap, held_windows);
  MESSAGE("held-out action mse: dd ", dd_mse, " koap ", koap_mse);
  CHECK(koap_mse < dd_mse);
}

TEST_CASE("vae kl identity and overfit reconstruction") {
  CHECK(vae_kl(Vec::Zero(4), Vec::Zero(4)) == doctest::Approx(0.0));
  Vec mu = make_vec({1.0, -1.0});
  CHECK(vae_kl(mu, Vec::Zero(2)) == doctest::Approx(1.0));

  // Memorize a single window.
  Trajectory t;
  for (int s = 0; s < 8; ++s) {
    t.states.push_back(make_vec({0.1 * s, 0.05 * s}));
    if (s > 0) t.actions.push_back(make_vec({0.1, 0.05}));
  }
  VaeConfig cfg;
  cfg.state_dim = 2;
  cfg.action_dim = 2;
  cfg.history = 1;
  cfg.horizon = 3;
  cfg.latent_dim = 4;
  cfg.hidden = {32};
  cfg.kl_weight = 1e-4;
  cfg.stage1.epochs = 200;
  cfg.stage1.min_steps = 1500;
  cfg.stage2.epochs = 10;
  cfg.stage2.min_steps = 200;
  VaeModel model = train_vae_controller({t}, {t}, cfg);

  auto ws = make_windows(t, 1, 3, false);
  Vec flat = model.flatten_window(
      {ws[0].states[0]},
      [&] {
        Mat plan(4, 2);
        for (int r = 0; r < 4; ++r) plan.row(r) = ws[0].states[1 + r].transpose();
        return plan;
      }());
  Vec mu2, lv;
  model.encode(flat, mu2, lv);
  CHECK((model.decode(mu2) - flat).squaredNorm() < 0.05);
}

TEST_CASE("vae stage two never touches stage-one parameters") {
  LtiData data(10, 12, 41);
  VaeConfig cfg;
  cfg.state_dim = 2;
  cfg.action_dim = 1;
  cfg.history = 1;
  cfg.horizon = 3;
  cfg.latent_dim = 4;
  cfg.hidden = {16};
  cfg.stage1.epochs = 3;
  cfg.stage1.min_steps = 100;
  cfg.stage2.epochs = 5;
  cfg.stage2.min_steps = 200;
  cfg.stage1.seed = 5;
  cfg.stage2.seed = 6;

  VaeModel with_labels = train_vae_controller(data.dx, data.da(4), cfg);
  VaeModel without_labels = train_vae_controller(data.dx, {}, cfg);

  for (const char* prefix : {"enc.", "dec."}) {
    for (const auto& seg : with_labels.params().segments()) {
      if (seg.name.rfind(prefix, 0) != 0) continue;
      CHECK((with_labels.params().vec(seg) - without_labels.params().vec(seg))
                .cwiseAbs()
                .maxCoeff() == 0.0);
    }
  }
  // The head did train.
  auto head = with_labels.params().segment("head.w");
  CHECK((with_labels.params().vec(head) - without_labels.params().vec(head))
            .cwiseAbs()
            .maxCoeff() > 0.0);
}

TEST_CASE("vae loss passes finite differences") {
  VaeConfig cfg;
  cfg.state_dim = 2;
  cfg.action_dim = 1;
  cfg.history = 1;
  cfg.horizon = 2;
  cfg.latent_dim = 3;
  cfg.hidden = {8};
  cfg.kl_weight = 0.5;
  VaeModel model = VaeModel::create(cfg, Normalizer::identity(2), 7);

  Rng rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  Vec flat(cfg.window_flat_dim());
  for (Index i = 0; i < flat.size(); ++i) flat[i] = g(rng);
  Vec eps(cfg.latent_dim);
  for (Index i = 0; i < eps.size(); ++i) eps[i] = g(rng);

  numerics::MlpParams enc, dec;
  for (Index l = 0; l < cfg.encoder_spec().layer_count(); ++l) {
    enc.w.push_back(model.params().segment("enc.w" + std::to_string(l)));
    enc.b.push_back(model.params().segment("enc.b" + std::to_string(l)));
  }
  for (Index l = 0; l < cfg.decoder_spec().layer_count(); ++l) {
    dec.w.push_back(model.params().segment("dec.w" + std::to_string(l)));
    dec.b.push_back(model.params().segment("dec.b" + std::to_string(l)));
  }

  auto builder = [&](numerics::Tape& t) {
    numerics::Tape::NodeId x = t.constant(flat);
    numerics::Tape::NodeId out =
        numerics::mlp_forward(t, cfg.encoder_spec(), enc, x);
    numerics::Tape::NodeId mu = t.slice(out, 0, cfg.latent_dim);
    numerics::Tape::NodeId lv = t.slice(out, cfg.latent_dim, cfg.latent_dim);
    numerics::Tape::NodeId z =
        t.add(mu, t.hadamard(t.exp(t.scale(lv, 0.5)), t.constant(eps)));
    numerics::Tape::NodeId rec =
        numerics::mlp_forward(t, cfg.decoder_spec(), dec, z);
    t.add_squared_norm(t.sub(rec, x), 1.0);
    t.add_squared_norm(mu, 0.5 * cfg.kl_weight);
    t.add_sum(t.exp(lv), 0.5 * cfg.kl_weight);
    t.add_sum(lv, -0.5 * cfg.kl_weight);
  };
  CHECK(numerics::grad_check(builder, model.params(), 1e-4) <= 1e-3);
}

TEST_CASE("lapo latent actions land on the quantization grid") {
  LtiData data(20, 14, 51);
  LapoConfig cfg;
  cfg.state_dim = 2;
  cfg.action_dim = 1;
  cfg.history = 1;
  cfg.horizon = 3;
  cfg.feature_dim = 8;
  cfg.fsq.levels = {5, 5};
  cfg.stage1.epochs = 4;
  cfg.stage1.min_steps = 300;
  cfg.stage2.epochs = 4;
  cfg.stage2.min_steps = 200;
  LapoModel model = train_lapo(data.dx, data.da(3), cfg);

  auto ws = make_windows(data.pool[5], 1, 3, false);
  auto codes = model.latent_codes(ws[2]);
  REQUIRE(codes.size() == 3);
  for (const Vec& c : codes) {
    Vec q = fsq_quantize(cfg.fsq, c);
    CHECK((q - c).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("lapo uses more than one code on heterogeneous data") {
  LtiData data(40, 14, 61);
  LapoConfig cfg;
  cfg.state_dim = 2;
  cfg.action_dim = 1;
  cfg.history = 1;
  cfg.horizon = 3;
  cfg.feature_dim = 8;
  cfg.fsq.levels = {5, 5};
  cfg.stage1.epochs = 8;
  cfg.stage1.min_steps = 800;
  cfg.stage2.epochs = 4;
  cfg.stage2.min_steps = 200;
  LapoModel model = train_lapo(data.dx, data.da(5), cfg);

  std::set<long> codes;
  for (int i = 0; i < 10; ++i) {
    for (const auto& w : make_windows(data.pool[i], 1, 3, false)) {
      for (const Vec& c : model.latent_codes(w)) {
        codes.insert(fsq_code_index(cfg.fsq, c));
      }
    }
  }
  MESSAGE("distinct lapo codes in use: ", codes.size());
  CHECK(codes.size() > 1);
}

TEST_CASE("coarse quantization costs action accuracy against koap") {
  LtiData data(80, 16, 71);
  auto da = data.da(6);
  auto held_out = envs::lti_generate(data.sys, 8, 16, 72);
  auto held_windows = labeled_windows(held_out, 2, 4);

  LapoConfig lc;
  lc.state_dim = 2;
  lc.action_dim = 1;
  lc.history = 2;
  lc.horizon = 4;
  lc.feature_dim = 8;
  lc.fsq.levels = {3, 3};
  lc.stage1.epochs = 12;
  lc.stage1.min_steps = 1200;
  lc.stage2.epochs = 12;
  lc.stage2.min_steps = 800;
  lc.stage1.seed = 2;
  LapoModel lapo = train_lapo(data.dx, da, lc);

  koopman::KoapConfig kc;
  kc.state_dim = 2;
  kc.action_dim = 1;
  kc.latent_dim = 4;
  kc.history = 2;
  kc.horizon = 4;
  kc.encoder_hidden = {32};
  kc.predictor_hidden = 32;
  kc.train.epochs = 20;
  kc.train.min_steps = 2000;
  kc.train.seed = 2;
  koopman::KoapModel koap = koopman::train_koap(data.dx, da, kc);

  double lapo_mse = 0.0;
  std::size_t n = 0;
  for (const auto& w : held_windows) {
    std::vector<Vec> history(w.states.begin(), w.states.begin() + 2);
    Mat plan(5, 2);
    for (int r = 0; r <= 4; ++r) plan.row(r) = w.states[2 + r].transpose();
    Mat pred = lapo.infer_actions(history, plan);
    for (int j = 0; j < 4; ++j) {
      lapo_mse += (pred.row(j).transpose() - w.actions[j]).squaredNorm();
      ++n;
    }
  }
  lapo_mse /= static_cast<double>(n);
  double koap_mse = koap_action_mse(koap, held_windows);
  MESSAGE("held-out action mse: lapo ", lapo_mse, " koap ", koap_mse);
  CHECK(koap_mse < lapo_mse);
}

TEST_CASE("pretrain stage one matches label-free joint training bit for bit") {
  LtiData data(12, 14, 81);
  koopman::KoapConfig cfg;
  cfg.state_dim = 2;
  cfg.action_dim = 1;
  cfg.latent_dim = 4;
  cfg.history = 1;
  cfg.horizon = 3;
  cfg.encoder_hidden = {8};
  cfg.predictor_hidden = 8;
  cfg.train.epochs = 3;
  cfg.train.min_steps = 100;
  cfg.train.seed = 17;
  cfg.finetune.epochs = 0;
  cfg.finetune.min_steps = 0;

  koopman::KoapModel plain = koopman::train_koap(data.dx, {}, cfg);
  koopman::KoapModel staged = pretrain_finetune(data.dx, {}, cfg);
  CHECK((plain.params().values() - staged.params().values())
            .cwiseAbs()
            .maxCoeff() == 0.0);
}

TEST_CASE("finetuning with labels moves the action decoder") {
  LtiData data(12, 14, 91);
  koopman::KoapConfig cfg;
  cfg.state_dim = 2;
  cfg.action_dim = 1;
  cfg.latent_dim = 4;
  cfg.history = 1;
  cfg.horizon = 3;
  cfg.encoder_hidden = {8};
  cfg.predictor_hidden = 8;
  cfg.train.epochs = 3;
  cfg.train.min_steps = 100;
  cfg.train.seed = 18;
  cfg.finetune.epochs = 3;
  cfg.finetune.min_steps = 100;
  cfg.finetune.seed = 19;

  koopman::KoapModel stage1 = koopman::train_koap(data.dx, {}, cfg);
  koopman::KoapModel staged = pretrain_finetune(data.dx, data.da(3), cfg);
  auto seg = staged.params().segment("act.w");
  CHECK((staged.params().vec(seg) - stage1.params().vec(seg))
            .cwiseAbs()
            .maxCoeff() > 0.0);
}

TEST_CASE("relabeling covers every transition of the observation pool") {
  LtiData data(10, 9, 95);
  DdConfig cfg;
  cfg.state_dim = 2;
  cfg.action_dim = 1;
  cfg.history = 2;
  cfg.horizon = 4;
  cfg.hidden = 16;
  cfg.train.epochs = 3;
  cfg.train.min_steps = 100;
  DdModel labeler = train_dd_controller(data.da(3), cfg);

  auto relabeled = relabel_transitions(labeler, data.dx);
  REQUIRE(relabeled.size() == data.dx.size());
  for (std::size_t i = 0; i < relabeled.size(); ++i) {
    CHECK(relabeled[i].actions.size() == relabeled[i].states.size() - 1);
    relabeled[i].validate();
  }

  // Short trajectories still get fully labeled via end padding.
  Trajectory shorty;
  for (int s = 0; s < 3; ++s) {
    shorty.states.push_back(make_vec({0.1 * s, 0.0}));
  }
  auto relabeled_short = relabel_transitions(labeler, {shorty});
  CHECK(relabeled_short[0].actions.size() == 2);
}

TEST_CASE("relabeler equals the supervised baseline under full labels") {
  LtiData data(10, 12, 97);
  DdConfig cfg;
  cfg.state_dim = 2;
  cfg.action_dim = 1;
  cfg.history = 1;
  cfg.horizon = 3;
  cfg.hidden = 16;
  cfg.train.epochs = 2;
  cfg.train.min_steps = 60;
  cfg.train.seed = 7;

  // The relabeler is the same supervised learner trained on the same data.
  DdConfig labeler_cfg = cfg;
  labeler_cfg.train.seed = derive_seed(cfg.train.seed, "relabeler");
  DdModel direct = train_dd_controller(data.pool, labeler_cfg);
  auto [relabeled, final_model] = relabel_and_train(data.dx, data.pool, cfg);
  (void)final_model;
  DdModel again = train_dd_controller(data.pool, labeler_cfg);
  CHECK((direct.params().values() - again.params().values())
            .cwiseAbs()
            .maxCoeff() == 0.0);
}

TEST_CASE("action diffusion emits the right shape and no states") {
  LtiData data(30, 14, 99);
  DpConfig cfg;
  cfg.state_dim = 2;
  cfg.action_dim = 1;
  cfg.history = 2;
  cfg.horizon = 4;
  cfg.hidden = {32};
  cfg.diffusion_steps = 8;
  cfg.train.epochs = 3;
  cfg.train.min_steps = 300;
  DpModel model = train_diffusion_policy(data.pool, cfg);

  Rng rng(1);
  std::vector<Vec> history = {data.pool[0].states[0], data.pool[0].states[1]};
  Mat actions = model.plan_actions(data.pool[0].states[2], history, rng);
  CHECK(actions.rows() == 4);
  CHECK(actions.cols() == 1);

  CHECK_THROWS_AS(train_diffusion_policy({}, cfg), LabelError);
}

TEST_CASE("registry ids, requirements, and checkpoint round-trips") {
  auto ids = method_ids();
  CHECK(ids.size() == 8);
  for (const char* id :
       {"koap", "dd", "vae", "lapo", "dp", "nonlinear", "pretrain", "relabel"}) {
    CHECK(is_method(id));
  }
  CHECK_FALSE(is_method("nope"));
  CHECK(method_needs_planner("koap"));
  CHECK_FALSE(method_needs_planner("dp"));
  CHECK(method_needs_labels("dd"));
  CHECK_FALSE(method_needs_labels("koap"));
}
