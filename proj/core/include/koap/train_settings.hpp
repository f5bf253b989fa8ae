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

#ifndef KOAP_TRAIN_SETTINGS_HPP_
#define KOAP_TRAIN_SETTINGS_HPP_

#include <cstdint>
#include <vector>

#include "koap/numerics/optimizer.hpp"

namespace koap {

// Shared knobs for the minibatch trainers. Small datasets get a floor on
// the total number of optimizer steps so low label levels still converge.
struct TrainSettings {
  int epochs = 20;
  int min_steps = 4000;
  int batch = 32;
  int batch_labeled = 16;
  numerics::OptimizerSettings opt;
  std::uint64_t seed = 0;
};

struct TrainLog {
  std::vector<double> epoch_loss;
};

}  // namespace koap

#endif  // KOAP_TRAIN_SETTINGS_HPP_
