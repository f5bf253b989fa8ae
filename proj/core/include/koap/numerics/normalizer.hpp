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

#ifndef KOAP_NUMERICS_NORMALIZER_HPP_
#define KOAP_NUMERICS_NORMALIZER_HPP_

#include <vector>

#include "koap/common.hpp"

namespace koap::numerics {

// Per-dimension standardization. Fitted once on the observation pool and
// stored in every checkpoint so training and inference agree.
struct Normalizer {
  Vec mean;
  Vec std;

  static Normalizer identity(Index dim) {
    return {Vec::Zero(dim), Vec::Ones(dim)};
  }
  static Normalizer fit(const std::vector<Vec>& samples);

  Index dim() const { return mean.size(); }
  Vec normalize(const Vec& x) const {
    return (x - mean).cwiseQuotient(std);
  }
  Vec denormalize(const Vec& z) const {
    return z.cwiseProduct(std) + mean;
  }
};

}  // namespace koap::numerics

#endif  // KOAP_NUMERICS_NORMALIZER_HPP_
