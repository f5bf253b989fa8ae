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

#ifndef KOAP_BASELINES_VARIANTS_HPP_
#define KOAP_BASELINES_VARIANTS_HPP_

#include <utility>
#include <vector>

#include "koap/baselines/dd.hpp"
#include "koap/koopman/model.hpp"

namespace koap::baselines {

// Same loss structure with the linear latent step replaced by a network and
// the affine action decoder replaced by a network.
koopman::KoapConfig nonlinear_variant_config(koopman::KoapConfig base);

koopman::KoapModel train_nonlinear_variant(const std::vector<Trajectory>& dx,
                                           const std::vector<Trajectory>& da,
                                           const koopman::KoapConfig& base);

// Stage 1 trains the latent models with no action labels at all; stage 2
// trains the action decoder and finetunes the latent models on the labeled
// trajectories alone.
koopman::KoapModel pretrain_finetune(const std::vector<Trajectory>& dx,
                                     const std::vector<Trajectory>& da,
                                     const koopman::KoapConfig& cfg);

// Trains an action predictor on the labeled set alone (no dynamics model),
// uses it to label every transition of the observation pool, then trains the
// supervised controller on relabeled + real data.
std::pair<std::vector<Trajectory>, DdModel> relabel_and_train(
    const std::vector<Trajectory>& dx, const std::vector<Trajectory>& da,
    const DdConfig& cfg);

// The relabeling step alone; exposed for inspection.
std::vector<Trajectory> relabel_transitions(const DdModel& labeler,
                                            const std::vector<Trajectory>& dx);

}  // namespace koap::baselines

#endif  // KOAP_BASELINES_VARIANTS_HPP_
