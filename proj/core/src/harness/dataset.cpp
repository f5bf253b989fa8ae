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

#include "koap/harness/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace koap::harness {

std::vector<DatasetBundle> build_levels(const std::vector<Trajectory>& pool,
                                        const std::vector<double>& fractions,
                                        std::uint64_t seed) {
  if (pool.empty()) throw ConfigError("build_levels needs a trajectory pool");
  if (fractions.empty()) throw ConfigError("build_levels needs fractions");
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    if (fractions[i] <= 0.0 || fractions[i] > 1.0) {
      throw ConfigError("fractions must lie in (0, 1]");
    }
    if (i > 0 && fractions[i] <= fractions[i - 1]) {
      throw ConfigError("fractions must be increasing");
    }
  }
  for (const Trajectory& t : pool) {
    if (!t.labeled()) {
      throw LabelError("build_levels pool must be fully labeled");
    }
  }

  std::vector<std::size_t> perm(pool.size());
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(derive_seed(seed, "levels"));
  std::shuffle(perm.begin(), perm.end(), rng);

  std::vector<Trajectory> dx;
  dx.reserve(pool.size());
  for (std::size_t i : perm) dx.push_back(pool[i].stripped());

  std::vector<DatasetBundle> out;
  for (std::size_t li = 0; li < fractions.size(); ++li) {
    std::size_t count = static_cast<std::size_t>(
        std::ceil(fractions[li] * static_cast<double>(pool.size())));
    if (count == 0) {
      throw ConfigError("fraction yields an empty labeled set");
    }
    DatasetBundle b;
    b.dx = dx;
    for (std::size_t i = 0; i < count; ++i) b.da.push_back(pool[perm[i]]);
    b.level = static_cast<int>(li) + 1;
    b.fraction = fractions[li];
    b.seed = seed;
    b.env = pool.front().env;
    out.push_back(std::move(b));
  }
  return out;
}

DatasetBundle with_obs_fraction(const DatasetBundle& bundle, double frac) {
  if (frac <= 0.0 || frac > 1.0) {
    throw ConfigError("observation fraction must lie in (0, 1]");
  }
  DatasetBundle out = bundle;
  std::size_t count = static_cast<std::size_t>(
      std::ceil(frac * static_cast<double>(bundle.dx.size())));
  count = std::max<std::size_t>(count, 1);
  out.dx.assign(bundle.dx.begin(), bundle.dx.begin() + count);
  return out;
}

}  // namespace koap::harness
