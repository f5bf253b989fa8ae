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

#include "koap/baselines/variants.hpp"

namespace koap::baselines {

koopman::KoapConfig nonlinear_variant_config(koopman::KoapConfig base) {
  base.dynamics = koopman::DynamicsKind::kMlp;
  base.action_decoder = koopman::ActionDecoderKind::kMlp;
  return base;
}

koopman::KoapModel train_nonlinear_variant(const std::vector<Trajectory>& dx,
                                           const std::vector<Trajectory>& da,
                                           const koopman::KoapConfig& base) {
  return koopman::train_koap(dx, da, nonlinear_variant_config(base));
}

koopman::KoapModel pretrain_finetune(const std::vector<Trajectory>& dx,
                                     const std::vector<Trajectory>& da,
                                     const koopman::KoapConfig& cfg) {
  koopman::KoapModel model = koopman::train_koap(dx, {}, cfg);
  koopman::finetune_koap(model, da, cfg.finetune);
  return model;
}

std::vector<Trajectory> relabel_transitions(const DdModel& labeler,
                                            const std::vector<Trajectory>& dx) {
  const int n = labeler.history_len();
  const int k = labeler.horizon();
  const Index d = labeler.config().state_dim;
  std::vector<Trajectory> out;
  out.reserve(dx.size());
  for (const Trajectory& src : dx) {
    Trajectory t = src.stripped();
    const int last = static_cast<int>(t.states.size()) - 1;

    // States padded at the end so short trajectories and tail transitions
    // still get full prediction windows.
    auto state_at = [&](int i) -> const Vec& {
      return t.states[std::min(std::max(i, 0), last)];
    };
    auto window_actions = [&](int start) {
      std::vector<Vec> history;
      for (int j = start - n; j < start; ++j) history.push_back(state_at(j));
      Mat plan(k + 1, d);
      for (int j = 0; j <= k; ++j) {
        plan.row(j) = state_at(start + j).transpose();
      }
      return labeler.infer_actions(history, plan);
    };

    const int last_window = std::max(0, last - k);
    Mat tail = window_actions(last_window);
    t.actions.clear();
    for (int j = 0; j < last; ++j) {
      if (j < last_window) {
        t.actions.push_back(window_actions(j).row(0).transpose());
      } else {
        t.actions.push_back(tail.row(j - last_window).transpose());
      }
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::pair<std::vector<Trajectory>, DdModel> relabel_and_train(
    const std::vector<Trajectory>& dx, const std::vector<Trajectory>& da,
    const DdConfig& cfg) {
  if (da.empty()) throw LabelError("relabel_and_train needs labeled data");
  DdConfig labeler_cfg = cfg;
  labeler_cfg.train.seed = derive_seed(cfg.train.seed, "relabeler");
  DdModel labeler = train_dd_controller(da, labeler_cfg);

  std::vector<Trajectory> relabeled = relabel_transitions(labeler, dx);
  std::vector<Trajectory> merged = relabeled;
  merged.insert(merged.end(), da.begin(), da.end());

  DdConfig final_cfg = cfg;
  final_cfg.train.seed = derive_seed(cfg.train.seed, "relabel-final");
  DdModel controller = train_dd_controller(merged, final_cfg);
  return {std::move(relabeled), std::move(controller)};
}

}  // namespace koap::baselines
