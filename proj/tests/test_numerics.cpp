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

#include <cmath>
#include <filesystem>

#include "koap/numerics/checkpoint.hpp"
#include "koap/numerics/grad.hpp"
#include "koap/numerics/mlp.hpp"
#include "koap/numerics/normalizer.hpp"
#include "koap/numerics/optimizer.hpp"
#include "koap/numerics/seq_encoder.hpp"

using namespace koap;
using namespace koap::numerics;

namespace {

Vec make_vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

}  // namespace

TEST_CASE("param vector segments are disjoint and cover the array") {
  ParamVector::Builder b;
  auto s1 = b.add("a", {2, 3});
  auto s2 = b.add("b", {4});
  ParamVector p = b.build();
  CHECK(p.size() == 10);
  CHECK(s1.offset == 0);
  CHECK(s2.offset == 6);
  CHECK(p.segment("a").size() == 6);
  CHECK(p.segment_name_at(7) == "b");
  CHECK_THROWS_AS(p.segment("missing"), ConfigError);
  ParamVector::Builder dup;
  dup.add("x", {1});
  CHECK_THROWS_AS(dup.add("x", {2}), ConfigError);
}

TEST_CASE("single affine layer with identity weights passes input through") {
  MlpSpec spec{{2, 2}, Activation::kTanh};
  ParamVector::Builder b;
  MlpParams mp = register_mlp(b, "m", spec);
  ParamVector p = b.build();
  p.mat(mp.w[0]).setIdentity();
  Vec out = mlp_forward(spec, mp, p, make_vec({1.0, 2.0}));
  CHECK(out[0] == doctest::Approx(1.0));
  CHECK(out[1] == doctest::Approx(2.0));
}

TEST_CASE("single affine layer matches a hand multiply") {
  MlpSpec spec{{2, 2}, Activation::kTanh};
  ParamVector::Builder b;
  MlpParams mp = register_mlp(b, "m", spec);
  ParamVector p = b.build();
  auto w = p.mat(mp.w[0]);
  w(0, 0) = 2.0;
  w(0, 1) = 0.0;
  w(1, 0) = 0.0;
  w(1, 1) = 3.0;
  p.vec(mp.b[0]) = make_vec({1.0, -1.0});
  Vec out = mlp_forward(spec, mp, p, make_vec({1.0, 1.0}));
  CHECK(out[0] == doctest::Approx(3.0));
  CHECK(out[1] == doctest::Approx(2.0));
}

TEST_CASE("mlp rejects inputs of the wrong length") {
  MlpSpec spec{{2, 2}, Activation::kTanh};
  ParamVector::Builder b;
  MlpParams mp = register_mlp(b, "m", spec);
  ParamVector p = b.build();
  CHECK_THROWS_AS(mlp_forward(spec, mp, p, make_vec({1.0, 2.0, 3.0})),
                  ConfigError);
}

TEST_CASE("mlp forward is pure") {
  MlpSpec spec{{3, 8, 2}, Activation::kTanh};
  ParamVector::Builder b;
  MlpParams mp = register_mlp(b, "m", spec);
  ParamVector p = b.build();
  Rng rng(5);
  init_mlp(p, mp, rng);
  Vec x = make_vec({0.3, -0.2, 0.9});
  Vec a = mlp_forward(spec, mp, p, x);
  Vec b2 = mlp_forward(spec, mp, p, x);
  CHECK((a - b2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("taped mlp forward matches plain forward") {
  MlpSpec spec{{3, 8, 8, 2}, Activation::kRelu};
  ParamVector::Builder b;
  MlpParams mp = register_mlp(b, "m", spec);
  ParamVector p = b.build();
  Rng rng(11);
  init_mlp(p, mp, rng);
  Vec x = make_vec({0.5, -1.0, 0.25});
  Vec plain = mlp_forward(spec, mp, p, x);
  Tape tape(p);
  Tape::NodeId out = mlp_forward(tape, spec, mp, tape.constant(x));
  CHECK((tape.value(out) - plain).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("sequence encoder emits one output per consecutive state pair") {
  SeqEncoderSpec spec{2, 4, 3, RecurrentCell::kGru};
  ParamVector::Builder b;
  SeqEncoderParams sp = register_seq_encoder(b, "f", spec);
  ParamVector p = b.build();
  Rng rng(1);
  init_seq_encoder(p, sp, rng);

  std::vector<Vec> states3(3, make_vec({0.1, 0.2}));
  CHECK(seq_forward(spec, sp, p, states3).size() == 2);

  std::vector<Vec> states15(15, make_vec({0.1, 0.2}));
  CHECK(seq_forward(spec, sp, p, states15).size() == 14);

  std::vector<Vec> states1(1, make_vec({0.1, 0.2}));
  CHECK_THROWS_AS(seq_forward(spec, sp, p, states1), WindowError);
}

TEST_CASE("zero-parameter gru yields the constant zero-input response") {
  // By hand: with all weights zero every gate is sigma(0) = 1/2, the
  // candidate is tanh(0) = 0, so h' = h + 1/2 (0 - h) stays exactly zero
  // from h0 = 0, and the zero readout emits zero at every step.
  SeqEncoderSpec spec{2, 4, 3, RecurrentCell::kGru};
  ParamVector::Builder b;
  SeqEncoderParams sp = register_seq_encoder(b, "f", spec);
  ParamVector p = b.build();  // zeros

  Rng rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Vec> states;
  for (int i = 0; i < 6; ++i) states.push_back(make_vec({g(rng), g(rng)}));
  auto outs = seq_forward(spec, sp, p, states);
  REQUIRE(outs.size() == 5);
  for (const Vec& o : outs) {
    CHECK(o.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    CHECK((o - outs.front()).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  }
}

TEST_CASE("taped recurrent forward matches plain forward for both cells") {
  for (RecurrentCell cell : {RecurrentCell::kGru, RecurrentCell::kLstm}) {
    SeqEncoderSpec spec{3, 5, 2, cell};
    ParamVector::Builder b;
    SeqEncoderParams sp = register_seq_encoder(b, "f", spec);
    ParamVector p = b.build();
    Rng rng(17);
    init_seq_encoder(p, sp, rng);
    std::vector<Vec> states;
    std::normal_distribution<double> g(0.0, 1.0);
    for (int i = 0; i < 5; ++i) {
      states.push_back(make_vec({g(rng), g(rng), g(rng)}));
    }
    auto plain = seq_forward(spec, sp, p, states);
    Tape tape(p);
    std::vector<Tape::NodeId> nodes;
    for (const Vec& s : states) nodes.push_back(tape.constant(s));
    auto taped = seq_forward(tape, spec, sp, nodes);
    REQUIRE(plain.size() == taped.size());
    for (std::size_t i = 0; i < plain.size(); ++i) {
      CHECK((tape.value(taped[i]) - plain[i]).cwiseAbs().maxCoeff() < 1e-14);
    }
  }
}

TEST_CASE("gradient of a squared norm is 2p") {
  ParamVector::Builder b;
  auto seg = b.add("p", {2});
  ParamVector p = b.build();
  p.vec(seg) = make_vec({1.0, -2.0});
  auto builder = [&](Tape& t) { t.add_squared_norm(t.param(seg), 1.0); };
  Vec g;
  double loss = grad(builder, p, g);
  CHECK(loss == doctest::Approx(5.0));
  CHECK(g[0] == doctest::Approx(2.0));
  CHECK(g[1] == doctest::Approx(-4.0));
}

TEST_CASE("gradient of a constant loss is zero") {
  ParamVector::Builder b;
  auto seg = b.add("p", {3});
  ParamVector p = b.build();
  p.vec(seg) = make_vec({1.0, 2.0, 3.0});
  auto builder = [&](Tape& t) { t.add_constant(4.2); };
  Vec g;
  double loss = grad(builder, p, g);
  CHECK(loss == doctest::Approx(4.2));
  CHECK(g.cwiseAbs().maxCoeff() == 0.0);
  CHECK(grad_check(builder, p, 1e-5) == doctest::Approx(0.0));
}

TEST_CASE("grad_check on a quadratic is exact to truncation order") {
  ParamVector::Builder b;
  auto seg = b.add("p", {4});
  ParamVector p = b.build();
  p.vec(seg) = make_vec({0.5, -1.5, 2.0, 0.1});
  auto builder = [&](Tape& t) { t.add_squared_norm(t.param(seg), 0.75); };
  CHECK(grad_check(builder, p, 1e-5) <= 1e-6);
}

TEST_CASE("grad_check covers every tape op") {
  // One graph touching linear, activations, hadamard, slice, concat, exp,
  // scale, sub, and both loss kinds.
  ParamVector::Builder b;
  MlpSpec spec{{3, 6, 4}, Activation::kTanh};
  MlpParams mp = register_mlp(b, "m", spec);
  auto extra = b.add("v", {4});
  ParamVector p = b.build();
  Rng rng(23);
  init_mlp(p, mp, rng);
  std::normal_distribution<double> g(0.0, 1.0);
  for (Index i = 0; i < 4; ++i) p.vec(extra)[i] = 0.3 * g(rng);
  Vec x = make_vec({0.2, -0.4, 0.8});

  auto builder = [&](Tape& t) {
    Tape::NodeId h = mlp_forward(t, spec, mp, t.constant(x));
    Tape::NodeId v = t.param(extra);
    Tape::NodeId mixed = t.hadamard(t.sigmoid(h), t.exp(t.scale(v, 0.5)));
    Tape::NodeId joined = t.concat(t.slice(mixed, 0, 2), t.sub(v, mixed));
    t.add_squared_norm(joined, 1.3);
    t.add_sum(t.sigmoid(mixed), -0.7);
  };
  CHECK(grad_check(builder, p, 1e-5) <= 1e-6);
}

TEST_CASE("recurrent gradients pass finite differences for both cells") {
  for (RecurrentCell cell : {RecurrentCell::kGru, RecurrentCell::kLstm}) {
    SeqEncoderSpec spec{2, 4, 3, cell};
    ParamVector::Builder b;
    SeqEncoderParams sp = register_seq_encoder(b, "f", spec);
    ParamVector p = b.build();
    Rng rng(29);
    init_seq_encoder(p, sp, rng);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<Vec> states;
    for (int i = 0; i < 5; ++i) states.push_back(make_vec({g(rng), g(rng)}));
    auto builder = [&](Tape& t) {
      std::vector<Tape::NodeId> nodes;
      for (const Vec& s : states) nodes.push_back(t.constant(s));
      auto outs = seq_forward(t, spec, sp, nodes);
      for (auto o : outs) t.add_squared_norm(o, 1.0);
    };
    CHECK(grad_check(builder, p, 1e-5) <= 1e-6);
  }
}

TEST_CASE("non-finite parameters are reported by segment name") {
  ParamVector::Builder b;
  auto seg = b.add("weights", {2});
  ParamVector p = b.build();
  p.vec(seg)[0] = std::numeric_limits<double>::infinity();
  auto builder = [&](Tape& t) { t.add_squared_norm(t.param(seg), 1.0); };
  Vec g;
  CHECK_THROWS_WITH_AS(grad(builder, p, g), doctest::Contains("weights"),
                       NumericError);
}

TEST_CASE("optimizer with zero gradient and zero decay is a fixed point") {
  ParamVector::Builder b;
  auto seg = b.add("p", {3});
  ParamVector p = b.build();
  p.vec(seg) = make_vec({1.0, -2.0, 0.5});
  Vec before = p.values();
  OptimizerSettings s;
  s.weight_decay = 0.0;
  OptimizerState st = OptimizerState::create(p.size(), s);
  for (int i = 0; i < 5; ++i) opt_step(st, p, Vec::Zero(3));
  CHECK((p.values() - before).cwiseAbs().maxCoeff() == 0.0);
  CHECK(st.step == 5);
}

TEST_CASE("one optimizer step on a bowl decreases the magnitude") {
  ParamVector::Builder b;
  auto seg = b.add("p", {1});
  ParamVector p = b.build();
  p.vec(seg)[0] = 1.0;
  OptimizerSettings s;
  s.lr = 1e-2;
  s.weight_decay = 0.0;
  OptimizerState st = OptimizerState::create(p.size(), s);
  Vec g(1);
  g[0] = 2.0 * p.values()[0];
  opt_step(st, p, g);
  CHECK(std::abs(p.values()[0]) < 1.0);
}

TEST_CASE("decoupled decay with zero gradient scales by 1 - lr*wd") {
  ParamVector::Builder b;
  auto seg = b.add("p", {2});
  ParamVector p = b.build();
  p.vec(seg) = make_vec({2.0, -4.0});
  OptimizerSettings s;
  s.lr = 0.1;
  s.weight_decay = 0.5;
  OptimizerState st = OptimizerState::create(p.size(), s);
  opt_step(st, p, Vec::Zero(2));
  CHECK(p.values()[0] == doctest::Approx(2.0 * (1.0 - 0.1 * 0.5)));
  CHECK(p.values()[1] == doctest::Approx(-4.0 * (1.0 - 0.1 * 0.5)));
}

TEST_CASE("frozen segments ignore both gradient and decay") {
  ParamVector::Builder b;
  auto train_seg = b.add("train", {2});
  auto frozen = b.add("frozen", {2});
  ParamVector p = b.build();
  p.vec(train_seg) = make_vec({1.0, 1.0});
  p.vec(frozen) = make_vec({3.0, -3.0});
  OptimizerSettings s;
  s.weight_decay = 0.1;
  OptimizerState st = OptimizerState::create(p.size(), s);
  st.freeze_segments(p, {"frozen"});
  opt_step(st, p, Vec::Ones(4));
  CHECK(p.vec(frozen)[0] == 3.0);
  CHECK(p.vec(frozen)[1] == -3.0);
  CHECK(p.vec(train_seg)[0] != 1.0);
}

TEST_CASE("non-finite gradients raise a numerical error") {
  ParamVector::Builder b;
  auto seg = b.add("p", {2});
  ParamVector p = b.build();
  OptimizerState st = OptimizerState::create(p.size(), {});
  Vec g = make_vec({1.0, std::nan("")});
  CHECK_THROWS_AS(opt_step(st, p, g), NumericError);
}

TEST_CASE("checkpoints round-trip exactly") {
  ParamVector::Builder b;
  MlpSpec spec{{2, 4, 2}, Activation::kTanh};
  MlpParams mp = register_mlp(b, "m", spec);
  ParamVector p = b.build();
  Rng rng(9);
  init_mlp(p, mp, rng);

  auto path = std::filesystem::temp_directory_path() / "koap_ckpt_test.bin";
  save_checkpoint(path.string(), p, R"({"kind":"test","note":1})");
  Checkpoint ck = load_checkpoint(path.string());
  CHECK(ck.params.size() == p.size());
  CHECK((ck.params.values() - p.values()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(ck.params.segment("m.w0").shape == p.segment("m.w0").shape);
  CHECK(ck.extra_json.find("test") != std::string::npos);
  std::filesystem::remove(path);
}

TEST_CASE("normalizer round-trips and floors constant dimensions") {
  std::vector<Vec> samples = {make_vec({1.0, 5.0}), make_vec({3.0, 5.0}),
                              make_vec({5.0, 5.0})};
  Normalizer n = Normalizer::fit(samples);
  CHECK(n.mean[0] == doctest::Approx(3.0));
  CHECK(n.std[1] == doctest::Approx(1e-8));
  Vec x = make_vec({2.0, 5.0});
  CHECK((n.denormalize(n.normalize(x)) - x).cwiseAbs().maxCoeff() < 1e-12);
}
