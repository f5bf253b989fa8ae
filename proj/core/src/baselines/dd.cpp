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

#include "koap/baselines/dd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "koap/numerics/checkpoint.hpp"

namespace koap::baselines {

using numerics::Tape;

numerics::SeqEncoderSpec DdConfig::encoder_spec() const {
  numerics::SeqEncoderSpec s;
  s.input_dim = state_dim;
  s.hidden_dim = hidden;
  s.output_dim = action_dim;
  s.cell = cell;
  return s;
}

void DdConfig::validate() const {
  if (state_dim < 1 || action_dim < 1 || hidden < 1) {
    throw ConfigError("dd config dims must be positive");
  }
  if (history < 0 || horizon < 1) {
    throw ConfigError("dd config window malformed");
  }
}

DdModel DdModel::create(const DdConfig& cfg, const numerics::Normalizer& norm,
                        std::uint64_t init_seed) {
  cfg.validate();
  DdModel m;
  m.cfg_ = cfg;
  m.norm_ = norm;
  numerics::ParamVector::Builder b;
  m.encoder_ = numerics::register_seq_encoder(b, "f", cfg.encoder_spec());
  m.params_ = b.build();
  Rng rng(init_seed);
  numerics::init_seq_encoder(m.params_, m.encoder_, rng);
  return m;
}

Mat DdModel::infer_actions(const std::vector<Vec>& history,
                           const Mat& plan) const {
  if (static_cast<int>(history.size()) != cfg_.history) {
    throw ConfigError("dd infer_actions: history length mismatch");
  }
  if (plan.rows() != cfg_.horizon + 1 || plan.cols() != cfg_.state_dim) {
    throw ConfigError("dd infer_actions: plan shape mismatch");
  }
  std::vector<Vec> states;
  states.reserve(cfg_.history + 1 + cfg_.horizon);
  for (const Vec& h : history) states.push_back(norm_.normalize(h));
  for (Index r = 0; r < plan.rows(); ++r) {
    states.push_back(norm_.normalize(plan.row(r).transpose()));
  }
  std::vector<Vec> outs =
      numerics::seq_forward(cfg_.encoder_spec(), encoder_, params_, states);
  Mat actions(cfg_.horizon, cfg_.action_dim);
  for (int j = 0; j < cfg_.horizon; ++j) {
    actions.row(j) = outs[cfg_.history + j].transpose();
  }
  return actions;
}

double DdModel::action_mse(const std::vector<StateWindow>& windows) const {
  double acc = 0.0;
  std::size_t n = 0;
  for (const StateWindow& w : windows) {
    if (!w.labeled()) throw LabelError("action_mse needs labeled windows");
    std::vector<Vec> history(w.states.begin(), w.states.begin() + cfg_.history);
    Mat plan(cfg_.horizon + 1, cfg_.state_dim);
    for (int r = 0; r <= cfg_.horizon; ++r) {
      plan.row(r) = w.states[cfg_.history + r].transpose();
    }
    Mat pred = infer_actions(history, plan);
    for (int j = 0; j < cfg_.horizon; ++j) {
      acc += (pred.row(j).transpose() - w.actions[j]).squaredNorm();
      ++n;
    }
  }
  return acc / static_cast<double>(n);
}

DdModel train_dd_controller(const std::vector<Trajectory>& da,
                            const DdConfig& cfg) {
  cfg.validate();
  if (da.empty()) throw LabelError("train_dd_controller needs labeled data");

  std::vector<Vec> states;
  for (const Trajectory& t : da) {
    for (const Vec& s : t.states) states.push_back(s);
  }
  numerics::Normalizer norm = numerics::Normalizer::fit(states);

  std::vector<StateWindow> windows;
  for (const Trajectory& t : da) {
    for (auto& w : make_windows(t, cfg.history, cfg.horizon, true)) {
      StateWindow nw = w;
      for (Vec& s : nw.states) s = norm.normalize(s);
      windows.push_back(std::move(nw));
    }
  }
  if (windows.empty()) {
    throw ConfigError("dd training found no full windows");
  }

  DdModel model =
      DdModel::create(cfg, norm, derive_seed(cfg.train.seed, "dd-init"));
  numerics::ParamVector& params = model.params();
  numerics::OptimizerState opt =
      numerics::OptimizerState::create(params.size(), cfg.train.opt);
  Rng rng(derive_seed(cfg.train.seed, "dd-train"));

  const numerics::SeqEncoderSpec spec = cfg.encoder_spec();
  std::vector<std::size_t> order(windows.size());
  std::iota(order.begin(), order.end(), 0);
  const int steps_per_epoch = std::max<int>(
      1, static_cast<int>((windows.size() + cfg.train.batch - 1) /
                          cfg.train.batch));
  const int epochs = std::max(
      cfg.train.epochs,
      (cfg.train.min_steps + steps_per_epoch - 1) / steps_per_epoch);

  Tape tape(params);
  Vec grad(params.size());
  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (int step = 0; step < steps_per_epoch; ++step) {
      tape.reset();
      int count = 0;
      for (int b = 0; b < cfg.train.batch; ++b) {
        std::size_t idx = static_cast<std::size_t>(step) * cfg.train.batch + b;
        if (idx >= order.size()) break;
        const StateWindow& w = windows[order[idx]];
        std::vector<Tape::NodeId> xs;
        for (const Vec& s : w.states) xs.push_back(tape.constant(s));
        auto outs = numerics::seq_forward(tape, spec, model.encoder(), xs);
        for (int j = 0; j < cfg.horizon; ++j) {
          Tape::NodeId res = tape.sub(outs[cfg.history + j],
                                      tape.constant(w.actions[j]));
          tape.add_squared_norm(res, 1.0);
          ++count;
        }
      }
      if (count == 0) continue;
      double loss = tape.loss() / count;
      if (!std::isfinite(loss)) {
        throw NumericError("dd training diverged at epoch " +
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
  return model;
}

void DdModel::save(const std::string& path) const {
  nlohmann::json extra;
  extra["kind"] = "dd";
  extra["config"] = {
      {"state_dim", cfg_.state_dim},
      {"action_dim", cfg_.action_dim},
      {"history", cfg_.history},
      {"horizon", cfg_.horizon},
      {"hidden", cfg_.hidden},
      {"cell", cfg_.cell == numerics::RecurrentCell::kGru ? "gru" : "lstm"},
  };
  extra["normalizer"] = {
      {"mean", std::vector<double>(norm_.mean.data(),
                                   norm_.mean.data() + norm_.mean.size())},
      {"std", std::vector<double>(norm_.std.data(),
                                  norm_.std.data() + norm_.std.size())},
  };
  numerics::save_checkpoint(path, params_, extra.dump());
}

DdModel DdModel::load(const std::string& path) {
  numerics::Checkpoint ck = numerics::load_checkpoint(path);
  nlohmann::json extra = nlohmann::json::parse(ck.extra_json);
  if (extra.at("kind") != "dd") {
    throw OrchestrationError("checkpoint at '" + path + "' is not a dd model");
  }
  const auto& jc = extra.at("config");
  DdConfig cfg;
  cfg.state_dim = jc.at("state_dim");
  cfg.action_dim = jc.at("action_dim");
  cfg.history = jc.at("history");
  cfg.horizon = jc.at("horizon");
  cfg.hidden = jc.at("hidden");
  cfg.cell = jc.at("cell") == "gru" ? numerics::RecurrentCell::kGru
                                    : numerics::RecurrentCell::kLstm;
  const auto& jn = extra.at("normalizer");
  numerics::Normalizer norm;
  auto mean = jn.at("mean").get<std::vector<double>>();
  auto std_ = jn.at("std").get<std::vector<double>>();
  norm.mean = Eigen::Map<const Vec>(mean.data(), mean.size());
  norm.std = Eigen::Map<const Vec>(std_.data(), std_.size());

  DdModel model = create(cfg, norm, 0);
  if (model.params_.size() != ck.params.size()) {
    throw OrchestrationError("dd checkpoint layout mismatch");
  }
  model.params_.values() = ck.params.values();
  return model;
}

}  // namespace koap::baselines
