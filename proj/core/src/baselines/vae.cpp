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

#include "koap/baselines/vae.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "koap/numerics/checkpoint.hpp"

namespace koap::baselines {

using numerics::Tape;

numerics::MlpSpec VaeConfig::encoder_spec() const {
  numerics::MlpSpec s;
  s.widths.push_back(window_flat_dim());
  for (Index h : hidden) s.widths.push_back(h);
  s.widths.push_back(2 * latent_dim);
  s.activation = numerics::Activation::kTanh;
  return s;
}

numerics::MlpSpec VaeConfig::decoder_spec() const {
  numerics::MlpSpec s;
  s.widths.push_back(latent_dim);
  for (Index h : hidden) s.widths.push_back(h);
  s.widths.push_back(window_flat_dim());
  s.activation = numerics::Activation::kTanh;
  return s;
}

void VaeConfig::validate() const {
  if (state_dim < 1 || action_dim < 1 || latent_dim < 1) {
    throw ConfigError("vae config dims must be positive");
  }
  if (kl_weight < 0) throw ConfigError("vae kl weight must be >= 0");
}

double vae_kl(const Vec& mu, const Vec& logvar) {
  return 0.5 * (mu.array().square() + logvar.array().exp() - logvar.array() -
                1.0)
                   .sum();
}

VaeModel VaeModel::create(const VaeConfig& cfg,
                          const numerics::Normalizer& norm,
                          std::uint64_t init_seed) {
  cfg.validate();
  VaeModel m;
  m.cfg_ = cfg;
  m.norm_ = norm;
  numerics::ParamVector::Builder b;
  m.encoder_ = numerics::register_mlp(b, "enc", cfg.encoder_spec());
  m.decoder_ = numerics::register_mlp(b, "dec", cfg.decoder_spec());
  m.head_w_ = b.add("head.w",
                    {static_cast<Index>(cfg.horizon) * cfg.action_dim,
                     cfg.latent_dim});
  m.head_b_ = b.add("head.b",
                    {static_cast<Index>(cfg.horizon) * cfg.action_dim});
  m.params_ = b.build();
  Rng rng(init_seed);
  numerics::init_mlp(m.params_, m.encoder_, rng);
  numerics::init_mlp(m.params_, m.decoder_, rng);
  double bound = std::sqrt(6.0 / double(m.head_w_.rows() + m.head_w_.cols()));
  std::uniform_real_distribution<double> u(-bound, bound);
  auto w = m.params_.mat(m.head_w_);
  for (Index c = 0; c < w.cols(); ++c) {
    for (Index r = 0; r < w.rows(); ++r) w(r, c) = u(rng);
  }
  m.params_.vec(m.head_b_).setZero();
  return m;
}

void VaeModel::encode(const Vec& flat_window, Vec& mu, Vec& logvar) const {
  Vec out = numerics::mlp_forward(cfg_.encoder_spec(), encoder_, params_,
                                  flat_window);
  mu = out.head(cfg_.latent_dim);
  logvar = out.tail(cfg_.latent_dim);
}

Vec VaeModel::decode(const Vec& z) const {
  return numerics::mlp_forward(cfg_.decoder_spec(), decoder_, params_, z);
}

Vec VaeModel::flatten_window(const std::vector<Vec>& history,
                             const Mat& plan) const {
  if (static_cast<int>(history.size()) != cfg_.history ||
      plan.rows() != cfg_.horizon + 1 || plan.cols() != cfg_.state_dim) {
    throw ConfigError("vae window shape mismatch");
  }
  Vec flat(cfg_.window_flat_dim());
  Index off = 0;
  for (const Vec& h : history) {
    flat.segment(off, cfg_.state_dim) = norm_.normalize(h);
    off += cfg_.state_dim;
  }
  for (Index r = 0; r < plan.rows(); ++r) {
    flat.segment(off, cfg_.state_dim) =
        norm_.normalize(plan.row(r).transpose());
    off += cfg_.state_dim;
  }
  return flat;
}

Mat VaeModel::infer_actions(const std::vector<Vec>& history,
                            const Mat& plan) const {
  Vec mu, logvar;
  encode(flatten_window(history, plan), mu, logvar);
  Vec flat_actions = params_.mat(head_w_) * mu + params_.vec(head_b_);
  Mat actions(cfg_.horizon, cfg_.action_dim);
  for (int j = 0; j < cfg_.horizon; ++j) {
    actions.row(j) =
        flat_actions.segment(static_cast<Index>(j) * cfg_.action_dim,
                             cfg_.action_dim)
            .transpose();
  }
  return actions;
}

namespace {

Vec window_to_flat(const StateWindow& w, const numerics::Normalizer& norm) {
  const Index d = w.states.front().size();
  Vec flat(static_cast<Index>(w.states.size()) * d);
  Index off = 0;
  for (const Vec& s : w.states) {
    flat.segment(off, d) = norm.normalize(s);
    off += d;
  }
  return flat;
}

Vec actions_to_flat(const StateWindow& w) {
  const Index a = w.actions.front().size();
  Vec flat(static_cast<Index>(w.actions.size()) * a);
  Index off = 0;
  for (const Vec& act : w.actions) {
    flat.segment(off, a) = act;
    off += a;
  }
  return flat;
}

}  // namespace

VaeModel train_vae_controller(const std::vector<Trajectory>& dx,
                              const std::vector<Trajectory>& da,
                              const VaeConfig& cfg) {
  cfg.validate();
  if (dx.empty()) throw ConfigError("train_vae_controller needs observations");

  std::vector<Vec> all_states;
  for (const Trajectory& t : dx) {
    for (const Vec& s : t.states) all_states.push_back(s);
  }
  numerics::Normalizer norm = numerics::Normalizer::fit(all_states);

  std::vector<Vec> obs_windows;
  for (const Trajectory& t : dx) {
    for (const auto& w : make_windows(t, cfg.history, cfg.horizon, false)) {
      obs_windows.push_back(window_to_flat(w, norm));
    }
  }
  if (obs_windows.empty()) throw ConfigError("vae found no windows");

  VaeModel model =
      VaeModel::create(cfg, norm, derive_seed(cfg.stage1.seed, "vae-init"));
  numerics::ParamVector& params = model.params();

  // Stage 1: autoencoding with the reparameterization trick; the action head
  // is frozen so decay cannot move it.
  {
    numerics::OptimizerState opt =
        numerics::OptimizerState::create(params.size(), cfg.stage1.opt);
    opt.freeze_segments(params, {"head."});
    Rng rng(derive_seed(cfg.stage1.seed, "vae-train"));
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<std::size_t> order(obs_windows.size());
    std::iota(order.begin(), order.end(), 0);
    const int steps_per_epoch = std::max<int>(
        1, static_cast<int>((obs_windows.size() + cfg.stage1.batch - 1) /
                            cfg.stage1.batch));
    const int epochs = std::max(
        cfg.stage1.epochs,
        (cfg.stage1.min_steps + steps_per_epoch - 1) / steps_per_epoch);
    const numerics::MlpSpec enc_spec = cfg.encoder_spec();
    const numerics::MlpSpec dec_spec = cfg.decoder_spec();
    Tape tape(params);
    Vec grad(params.size());
    for (int epoch = 0; epoch < epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng);
      double epoch_loss = 0.0;
      for (int step = 0; step < steps_per_epoch; ++step) {
        tape.reset();
        int count = 0;
        for (int b = 0; b < cfg.stage1.batch; ++b) {
          std::size_t idx =
              static_cast<std::size_t>(step) * cfg.stage1.batch + b;
          if (idx >= order.size()) break;
          const Vec& flat = obs_windows[order[idx]];
          Tape::NodeId x = tape.constant(flat);
          Tape::NodeId out =
              numerics::mlp_forward(tape, enc_spec, model.encoder_, x);
          Tape::NodeId mu = tape.slice(out, 0, cfg.latent_dim);
          Tape::NodeId logvar = tape.slice(out, cfg.latent_dim, cfg.latent_dim);
          Vec eps(cfg.latent_dim);
          for (Index i = 0; i < eps.size(); ++i) eps[i] = gauss(rng);
          Tape::NodeId z = tape.add(
              mu, tape.hadamard(tape.exp(tape.scale(logvar, 0.5)),
                                tape.constant(eps)));
          Tape::NodeId rec =
              numerics::mlp_forward(tape, dec_spec, model.decoder_, z);
          tape.add_squared_norm(tape.sub(rec, x), 1.0);
          // KL(q || N(0, I)) decomposed into tape-friendly terms.
          tape.add_squared_norm(mu, 0.5 * cfg.kl_weight);
          tape.add_sum(tape.exp(logvar), 0.5 * cfg.kl_weight);
          tape.add_sum(logvar, -0.5 * cfg.kl_weight);
          tape.add_constant(-0.5 * cfg.kl_weight *
                            static_cast<double>(cfg.latent_dim));
          ++count;
        }
        if (count == 0) continue;
        double loss = tape.loss() / count;
        if (!std::isfinite(loss)) {
          throw NumericError("vae stage-1 diverged at epoch " +
                             std::to_string(epoch));
        }
        grad.setZero();
        tape.backward(grad);
        grad /= static_cast<double>(count);
        opt_step(opt, params, grad);
        epoch_loss += loss;
      }
      model.train_log.epoch_loss.push_back(epoch_loss / steps_per_epoch);
    }
  }

  // Stage 2: linear action head on sampled embeddings. Posterior parameters
  // come from plain forward passes, so gradients cannot reach the frozen
  // autoencoder by construction; the optimizer mask enforces it again.
  if (!da.empty()) {
    std::vector<std::pair<Vec, Vec>> pairs;  // (flat window, flat actions)
    for (const Trajectory& t : da) {
      for (const auto& w : make_windows(t, cfg.history, cfg.horizon, true)) {
        pairs.emplace_back(window_to_flat(w, norm), actions_to_flat(w));
      }
    }
    if (!pairs.empty()) {
      numerics::OptimizerState opt =
          numerics::OptimizerState::create(params.size(), cfg.stage2.opt);
      opt.freeze_all_except(params, {"head."});
      Rng rng(derive_seed(cfg.stage2.seed, "vae-head"));
      std::normal_distribution<double> gauss(0.0, 1.0);
      std::vector<std::size_t> order(pairs.size());
      std::iota(order.begin(), order.end(), 0);
      const int steps_per_epoch = std::max<int>(
          1, static_cast<int>((pairs.size() + cfg.stage2.batch - 1) /
                              cfg.stage2.batch));
      const int epochs = std::max(
          cfg.stage2.epochs,
          (cfg.stage2.min_steps + steps_per_epoch - 1) / steps_per_epoch);
      Tape tape(params);
      Vec grad(params.size());
      for (int epoch = 0; epoch < epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (int step = 0; step < steps_per_epoch; ++step) {
          tape.reset();
          int count = 0;
          for (int b = 0; b < cfg.stage2.batch; ++b) {
            std::size_t idx =
                static_cast<std::size_t>(step) * cfg.stage2.batch + b;
            if (idx >= order.size()) break;
            const auto& [flat, target] = pairs[order[idx]];
            Vec mu, logvar;
            model.encode(flat, mu, logvar);
            Vec z = mu;
            for (Index i = 0; i < z.size(); ++i) {
              z[i] += std::exp(0.5 * logvar[i]) * gauss(rng);
            }
            Tape::NodeId zc = tape.constant(z);
            Tape::NodeId pred =
                tape.linear(model.head_w_, model.head_b_, zc);
            tape.add_squared_norm(tape.sub(pred, tape.constant(target)), 1.0);
            ++count;
          }
          if (count == 0) continue;
          if (!std::isfinite(tape.loss())) {
            throw NumericError("vae stage-2 diverged");
          }
          grad.setZero();
          tape.backward(grad);
          grad /= static_cast<double>(count);
          opt_step(opt, params, grad);
        }
      }
    }
  }
  return model;
}

void VaeModel::save(const std::string& path) const {
  nlohmann::json extra;
  extra["kind"] = "vae";
  extra["config"] = {
      {"state_dim", cfg_.state_dim},     {"action_dim", cfg_.action_dim},
      {"history", cfg_.history},         {"horizon", cfg_.horizon},
      {"latent_dim", cfg_.latent_dim},   {"hidden", cfg_.hidden},
      {"kl_weight", cfg_.kl_weight},
  };
  extra["normalizer"] = {
      {"mean", std::vector<double>(norm_.mean.data(),
                                   norm_.mean.data() + norm_.mean.size())},
      {"std", std::vector<double>(norm_.std.data(),
                                  norm_.std.data() + norm_.std.size())},
  };
  numerics::save_checkpoint(path, params_, extra.dump());
}

VaeModel VaeModel::load(const std::string& path) {
  numerics::Checkpoint ck = numerics::load_checkpoint(path);
  nlohmann::json extra = nlohmann::json::parse(ck.extra_json);
  if (extra.at("kind") != "vae") {
    throw OrchestrationError("checkpoint at '" + path + "' is not a vae model");
  }
  const auto& jc = extra.at("config");
  VaeConfig cfg;
  cfg.state_dim = jc.at("state_dim");
  cfg.action_dim = jc.at("action_dim");
  cfg.history = jc.at("history");
  cfg.horizon = jc.at("horizon");
  cfg.latent_dim = jc.at("latent_dim");
  cfg.hidden = jc.at("hidden").get<std::vector<Index>>();
  cfg.kl_weight = jc.at("kl_weight");
  const auto& jn = extra.at("normalizer");
  numerics::Normalizer norm;
  auto mean = jn.at("mean").get<std::vector<double>>();
  auto std_ = jn.at("std").get<std::vector<double>>();
  norm.mean = Eigen::Map<const Vec>(mean.data(), mean.size());
  norm.std = Eigen::Map<const Vec>(std_.data(), std_.size());
  VaeModel model = create(cfg, norm, 0);
  if (model.params_.size() != ck.params.size()) {
    throw OrchestrationError("vae checkpoint layout mismatch");
  }
  model.params_.values() = ck.params.values();
  return model;
}

}  // namespace koap::baselines
