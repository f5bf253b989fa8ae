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

#include "koap/numerics/normalizer.hpp"

#include <cmath>

namespace koap::numerics {

Normalizer Normalizer::fit(const std::vector<Vec>& samples) {
  if (samples.empty()) throw ConfigError("normalizer fit on empty sample set");
  const Index d = samples.front().size();
  Vec mean = Vec::Zero(d);
  for (const Vec& x : samples) {
    if (x.size() != d) throw ConfigError("normalizer samples disagree on dim");
    mean += x;
  }
  mean /= static_cast<double>(samples.size());
  Vec var = Vec::Zero(d);
  for (const Vec& x : samples) {
    var.array() += (x - mean).array().square();
  }
  var /= static_cast<double>(samples.size());
  Vec std = var.array().sqrt().max(1e-8);
  return {mean, std};
}

}  // namespace koap::numerics
