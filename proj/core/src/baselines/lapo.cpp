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

#include "koap/baselines/lapo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "koap/numerics/checkpoint.hpp"

namespace koap::baselines {

using numerics::Tape;

numerics::MlpSpec LapoConfig::feature_spec() const {
  numerics::MlpSpec s;
  s.widths.push_back(state_dim);
  for (Index h : feature_hidden) s.widths.push_back(h);
  s.widths.push_back(feature_dim);
  s.activation = numerics::Activation::kTanh;
  return s;
}

numerics::SeqEncoderSpec LapoConfig::inverse_spec() const {
  numerics::SeqEncoderSpec s;
  s.input_dim = state_dim;
  s.hidden_dim = inverse_hidden;
  s.output_dim = fsq.dim();
  s.cell = numerics::RecurrentCell::kGru;
  return s;
}

numerics::MlpSpec LapoConfig::forward_spec() const {
  numerics::MlpSpec s;
  s.widths.push_back(feature_dim + fsq.dim());
  for (Index h : forward_hidden) s.widths.push_back(h);
  s.widths.push_back(feature_dim);
  s.activation = numerics::Activation::kTanh;
  return s;
}

numerics::MlpSpec LapoConfig::state_decoder_spec() const {
  numerics::MlpSpec s;
  s.widths.push_back(feature_dim);
  for (Index h : forward_hidden) s.widths.push_back(h);
  s.widths.push_back(state_dim);
  s.activation = numerics::Activation::kTanh;
  return s;
}

void LapoConfig::validate() const {
  if (state_dim < 1 || action_dim < 1 || feature_dim < 1) {
    throw ConfigError("lapo config dims must be positive");
  }
  fsq.validate();
}

LapoModel LapoModel::create(const LapoConfig& cfg,
                            const numerics::Normalizer& norm,
                            std::uint64_t init_seed) {
  cfg.validate();
  LapoModel m;
  m.cfg_ = cfg;
  m.norm_ = norm;
  numerics::ParamVector::Builder b;
  m.features_ = numerics::register_mlp(b, "feat", cfg.feature_spec());
  m.inverse_ = numerics::register_seq_encoder(b, "inv", cfg.inverse_spec());
  m.forward_ = numerics::register_mlp(b, "fwd", cfg.forward_spec());
  m.state_decoder_ =
      numerics::register_mlp(b, "sdec", cfg.state_decoder_spec());
  m.head_w_ = b.add("head.w", {cfg.action_dim, cfg.fsq.dim()});
  m.head_b_ = b.add("head.b", {cfg.action_dim});
  m.params_ = b.build();
  Rng rng(init_seed);
  numerics::init_mlp(m.params_, m.features_, rng);
  numerics::init_seq_encoder(m.params_, m.inverse_, rng);
  numerics::init_mlp(m.params_, m.forward_, rng);
  numerics::init_mlp(m.params_, m.state_decoder_, rng);
  double bound = std::sqrt(6.0 / double(m.head_w_.rows() + m.head_w_.cols()));
  std::uniform_real_distribution<double> u(-bound, bound);
  auto w = m.params_.mat(m.head_w_);
  for (Index c = 0; c < w.cols(); ++c) {
    for (Index r = 0; r < w.rows(); ++r) w(r, c) = u(rng);
  }
  m.params_.vec(m.head_b_).setZero();
  return m;
}

std::vector<Vec> LapoModel::pre_quant_codes(
    const std::vector<Vec>& norm_states) const {
  return numerics::seq_forward(cfg_.inverse_spec(), inverse_, params_,
                               norm_states);
}

std::vector<Vec> LapoModel::latent_codes(const StateWindow& window) const {
  window.validate();
  std::vector<Vec> norm_states;
  norm_states.reserve(window.states.size());
  for (const Vec& s : window.states) norm_states.push_back(norm_.normalize(s));
  std::vector<Vec> pre = pre_quant_codes(norm_states);
  std::vector<Vec> codes;
  codes.reserve(cfg_.horizon);
  for (int j = 0; j < cfg_.horizon; ++j) {
    codes.push_back(fsq_quantize(cfg_.fsq, pre[window.history + j]));
  }
  return codes;
}

Mat LapoModel::infer_actions(const std::vector<Vec>& history,
                             const Mat& plan) const {
  if (static_cast<int>(history.size()) != cfg_.history ||
      plan.rows() != cfg_.horizon + 1 || plan.cols() != cfg_.state_dim) {
    throw ConfigError("lapo infer_actions shape mismatch");
  }
  StateWindow w;
  w.history = cfg_.history;
  for (const Vec& h : history) w.states.push_back(h);
  for (Index r = 0; r < plan.rows(); ++r) {
    w.states.push_back(plan.row(r).transpose());
  }
  std::vector<Vec> codes = latent_codes(w);
  Mat actions(cfg_.horizon, cfg_.action_dim);
  for (int j = 0; j < cfg_.horizon; ++j) {
    actions.row(j) =
        (params_.mat(head_w_) * codes[j] + params_.vec(head_b_)).transpose();
  }
  return actions;
}

LapoModel train_lapo(const std::vector<Trajectory>& dx,
                     const std::vector<Trajectory>& da,
                     const LapoConfig& cfg) {
  cfg.validate();
  if (dx.empty()) throw ConfigError("train_lapo needs observations");

  std::vector<Vec> all_states;
  for (const Trajectory& t : dx) {
    for (const Vec& s : t.states) all_states.push_back(s);
  }
  numerics::Normalizer norm = numerics::Normalizer::fit(all_states);

  auto normalize_states = [&](const StateWindow& w) {
    std::vector<Vec> out;
    out.reserve(w.states.size());
    for (const Vec& s : w.states) out.push_back(norm.normalize(s));
    return out;
  };

  std::vector<std::vector<Vec>> obs_windows;  // normalized window states
  for (const Trajectory& t : dx) {
    for (const auto& w : make_windows(t, cfg.history, cfg.horizon, false)) {
      obs_windows.push_back(normalize_states(w));
    }
  }
  if (obs_windows.empty()) throw ConfigError("lapo found no windows");

  LapoModel model =
      LapoModel::create(cfg, norm, derive_seed(cfg.stage1.seed, "lapo-init"));
  numerics::ParamVector& params = model.params();

  const numerics::MlpSpec feat_spec = cfg.feature_spec();
  const numerics::SeqEncoderSpec inv_spec = cfg.inverse_spec();
  const numerics::MlpSpec fwd_spec = cfg.forward_spec();
  const numerics::MlpSpec sdec_spec = cfg.state_decoder_spec();

  // Stage 1: next-state prediction through the quantized latent action.
  {
    numerics::OptimizerState opt =
        numerics::OptimizerState::create(params.size(), cfg.stage1.opt);
    opt.freeze_segments(params, {"head."});
    Rng rng(derive_seed(cfg.stage1.seed, "lapo-train"));
    std::vector<std::size_t> order(obs_windows.size());
    std::iota(order.begin(), order.end(), 0);
    const int steps_per_epoch = std::max<int>(
        1, static_cast<int>((obs_windows.size() + cfg.stage1.batch - 1) /
                            cfg.stage1.batch));
    const int epochs = std::max(
        cfg.stage1.epochs,
        (cfg.stage1.min_steps + steps_per_epoch - 1) / steps_per_epoch);
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
          const auto& states = obs_windows[order[idx]];
          std::vector<Tape::NodeId> xs;
          for (const Vec& s : states) xs.push_back(tape.constant(s));
          auto pre = numerics::seq_forward(tape, inv_spec, model.inverse_, xs);
          for (int j = 0; j < cfg.horizon; ++j) {
            Tape::NodeId code =
                fsq_quantize_st(tape, cfg.fsq, pre[cfg.history + j]);
            Tape::NodeId zt = numerics::mlp_forward(tape, feat_spec,
                                                    model.features_,
                                                    xs[cfg.history + j]);
            Tape::NodeId znext = numerics::mlp_forward(
                tape, fwd_spec, model.forward_, tape.concat(zt, code));
            Tape::NodeId xpred = numerics::mlp_forward(
                tape, sdec_spec, model.state_decoder_, znext);
            tape.add_squared_norm(
                tape.sub(xpred, xs[cfg.history + j + 1]), 1.0);
            ++count;
          }
        }
        if (count == 0) continue;
        double loss = tape.loss() / count;
        if (!std::isfinite(loss)) {
          throw NumericError("lapo stage-1 diverged at epoch " +
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

  // Stage 2: action head on quantized codes, everything else frozen.
  if (!da.empty()) {
    std::vector<std::pair<Vec, Vec>> pairs;  // (code, action)
    for (const Trajectory& t : da) {
      for (const auto& w : make_windows(t, cfg.history, cfg.horizon, true)) {
        std::vector<Vec> norm_states = normalize_states(w);
        std::vector<Vec> pre = model.pre_quant_codes(norm_states);
        for (int j = 0; j < cfg.horizon; ++j) {
          pairs.emplace_back(fsq_quantize(cfg.fsq, pre[cfg.history + j]),
                             w.actions[j]);
        }
      }
    }
    if (!pairs.empty()) {
      numerics::OptimizerState opt =
          numerics::OptimizerState::create(params.size(), cfg.stage2.opt);
      opt.freeze_all_except(params, {"head."});
      Rng rng(derive_seed(cfg.stage2.seed, "lapo-head"));
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
            const auto& [code, action] = pairs[order[idx]];
            Tape::NodeId pred = tape.linear(model.head_w_, model.head_b_,
                                            tape.constant(code));
            tape.add_squared_norm(tape.sub(pred, tape.constant(action)), 1.0);
            ++count;
          }
          if (count == 0) continue;
          if (!std::isfinite(tape.loss())) {
            throw NumericError("lapo stage-2 diverged");
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

void LapoModel::save(const std::string& path) const {
  nlohmann::json extra;
  extra["kind"] = "lapo";
  extra["config"] = {
      {"state_dim", cfg_.state_dim},
      {"action_dim", cfg_.action_dim},
      {"history", cfg_.history},
      {"horizon", cfg_.horizon},
      {"feature_dim", cfg_.feature_dim},
      {"feature_hidden", cfg_.feature_hidden},
      {"inverse_hidden", cfg_.inverse_hidden},
      {"forward_hidden", cfg_.forward_hidden},
      {"fsq_levels", cfg_.fsq.levels},
  };
  extra["normalizer"] = {
      {"mean", std::vector<double>(norm_.mean.data(),
                                   norm_.mean.data() + norm_.mean.size())},
      {"std", std::vector<double>(norm_.std.data(),
                                  norm_.std.data() + norm_.std.size())},
  };
  numerics::save_checkpoint(path, params_, extra.dump());
}

LapoModel LapoModel::load(const std::string& path) {
  numerics::Checkpoint ck = numerics::load_checkpoint(path);
  nlohmann::json extra = nlohmann::json::parse(ck.extra_json);
  if (extra.at("kind") != "lapo") {
    throw OrchestrationError("checkpoint at '" + path + "' is not a lapo model");
  }
  const auto& jc = extra.at("config");
  LapoConfig cfg;
  cfg.state_dim = jc.at("state_dim");
  cfg.action_dim = jc.at("action_dim");
  cfg.history = jc.at("history");
  cfg.horizon = jc.at("horizon");
  cfg.feature_dim = jc.at("feature_dim");
  cfg.feature_hidden = jc.at("feature_hidden").get<std::vector<Index>>();
  cfg.inverse_hidden = jc.at("inverse_hidden");
  cfg.forward_hidden = jc.at("forward_hidden").get<std::vector<Index>>();
  cfg.fsq.levels = jc.at("fsq_levels").get<std::vector<int>>();
  const auto& jn = extra.at("normalizer");
  numerics::Normalizer norm;
  auto mean = jn.at("mean").get<std::vector<double>>();
  auto std_ = jn.at("std").get<std::vector<double>>();
  norm.mean = Eigen::Map<const Vec>(mean.data(), mean.size());
  norm.std = Eigen::Map<const Vec>(std_.data(), std_.size());
  LapoModel model = create(cfg, norm, 0);
  if (model.params_.size() != ck.params.size()) {
    throw OrchestrationError("lapo checkpoint layout mismatch");
  }
  model.params_.values() = ck.params.values();
  return model;
}

}  // namespace koap::baselines
