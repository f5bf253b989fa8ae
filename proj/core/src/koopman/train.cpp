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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "koap/koopman/model.hpp"

namespace koap::koopman {

using numerics::OptimizerState;
using numerics::Tape;

namespace {

std::vector<StateWindow> collect_windows(const std::vector<Trajectory>& trajs,
                                         const KoapConfig& cfg,
                                         bool with_actions,
                                         const numerics::Normalizer& norm) {
  std::vector<StateWindow> out;
  for (const Trajectory& t : trajs) {
    auto ws = make_windows(t, cfg.history, cfg.horizon, with_actions);
    for (auto& w : ws) out.push_back(normalize_window(norm, w));
  }
  return out;
}

int effective_epochs(const TrainSettings& ts, std::size_t n_windows) {
  int steps_per_epoch = std::max<int>(
      1, static_cast<int>((n_windows + ts.batch - 1) / ts.batch));
  int floor_epochs = (ts.min_steps + steps_per_epoch - 1) / steps_per_epoch;
  return std::max(ts.epochs, floor_epochs);
}

// Shared minibatch loop over normalized windows.
TrainLog run_training(KoapModel& model, std::vector<StateWindow> unlabeled,
                      std::vector<StateWindow> labeled,
                      const TrainSettings& ts, double lambda_kpm,
                      double lambda_action, bool freeze_action_decoder) {
  const KoapConfig& cfg = model.config();
  numerics::ParamVector& params = model.params();

  OptimizerState opt = OptimizerState::create(params.size(), ts.opt);
  if (freeze_action_decoder) {
    opt.freeze_segments(params, {"act."});
  }

  Rng rng(derive_seed(ts.seed, "koap-train"));
  std::vector<std::size_t> order(unlabeled.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::size_t> labeled_order(labeled.size());
  std::iota(labeled_order.begin(), labeled_order.end(), 0);
  std::size_t labeled_cursor = 0;

  const int epochs = effective_epochs(ts, unlabeled.size());
  const int steps_per_epoch = std::max<int>(
      1, static_cast<int>((unlabeled.size() + ts.batch - 1) / ts.batch));

  Tape tape(params);
  Vec grad(params.size());
  TrainLog log;

  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (int step = 0; step < steps_per_epoch; ++step) {
      std::vector<const StateWindow*> batch;
      for (int b = 0; b < ts.batch; ++b) {
        std::size_t idx = (static_cast<std::size_t>(step) * ts.batch + b);
        if (idx >= order.size()) break;
        batch.push_back(&unlabeled[order[idx]]);
      }
      if (batch.empty()) continue;
      bool batch_has_labels = false;
      if (!labeled.empty() && lambda_action > 0.0) {
        for (int b = 0; b < ts.batch_labeled; ++b) {
          if (labeled_cursor == 0) {
            std::shuffle(labeled_order.begin(), labeled_order.end(), rng);
          }
          batch.push_back(&labeled[labeled_order[labeled_cursor]]);
          labeled_cursor = (labeled_cursor + 1) % labeled_order.size();
          batch_has_labels = true;
        }
      }
      tape.reset();
      add_koap_loss(tape, cfg, model.structure(), batch, 1.0, lambda_kpm,
                    batch_has_labels ? lambda_action : 0.0);
      double loss = tape.loss();
      if (!std::isfinite(loss)) {
        throw NumericError("koap training diverged at epoch " +
                           std::to_string(epoch) + " step " +
                           std::to_string(step));
      }
      grad.setZero();
      tape.backward(grad);
      opt_step(opt, params, grad);
      epoch_loss += loss;
    }
    log.epoch_loss.push_back(epoch_loss / steps_per_epoch);
  }
  return log;
}

}  // namespace

KoapModel train_koap(const std::vector<Trajectory>& dx,
                     const std::vector<Trajectory>& da,
                     const KoapConfig& cfg) {
  cfg.validate();
  if (dx.empty()) throw ConfigError("train_koap needs observation trajectories");

  std::vector<Vec> all_states;
  for (const Trajectory& t : dx) {
    for (const Vec& s : t.states) all_states.push_back(s);
  }
  numerics::Normalizer norm = numerics::Normalizer::fit(all_states);

  std::vector<StateWindow> unlabeled = collect_windows(dx, cfg, false, norm);
  std::vector<StateWindow> labeled = collect_windows(da, cfg, true, norm);
  if (unlabeled.empty()) {
    throw ConfigError("no training windows; trajectories shorter than window");
  }

  KoapModel model =
      KoapModel::create(cfg, norm, derive_seed(cfg.train.seed, "koap-init"));
  model.train_log =
      run_training(model, std::move(unlabeled), std::move(labeled), cfg.train,
                   cfg.lambda_kpm, cfg.lambda_action,
                   /*freeze_action_decoder=*/da.empty());
  return model;
}

void finetune_koap(KoapModel& model, const std::vector<Trajectory>& da,
                   const TrainSettings& settings) {
  if (da.empty()) return;
  const KoapConfig& cfg = model.config();
  std::vector<StateWindow> labeled =
      collect_windows(da, cfg, true, model.normalizer());
  if (labeled.empty()) return;
  // Labeled windows serve double duty here: they are the only observation
  // source as well, so the full loss runs on them.
  TrainLog log = run_training(model, labeled, labeled, settings,
                              cfg.lambda_kpm, cfg.lambda_action,
                              /*freeze_action_decoder=*/false);
  model.train_log.epoch_loss.insert(model.train_log.epoch_loss.end(),
                                    log.epoch_loss.begin(),
                                    log.epoch_loss.end());
}

}  // namespace koap::koopman
