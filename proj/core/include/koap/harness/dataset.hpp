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

#ifndef KOAP_HARNESS_DATASET_HPP_
#define KOAP_HARNESS_DATASET_HPP_

#include <string>
#include <vector>

#include "koap/trajectory.hpp"

namespace koap::harness {

// One action-data level: the full observation pool (stripped) plus the
// labeled subset for this level. Levels built from the same pool and seed
// are nested: a smaller level's labeled set is a prefix of a larger one's.
struct DatasetBundle {
  std::vector<Trajectory> dx;  // stripped copies, permuted pool order
  std::vector<Trajectory> da;  // labeled subset (prefix of the permutation)
  int level = 0;               // 1-based
  double fraction = 0.0;
  std::uint64_t seed = 0;
  std::string env;
};

// Labeled-subset sizes are ceil(fraction * pool size). fractions must be in
// (0, 1] and increasing.
std::vector<DatasetBundle> build_levels(const std::vector<Trajectory>& pool,
                                        const std::vector<double>& fractions,
                                        std::uint64_t seed);

// Shrinks the observation pool to its first ceil(frac * N) trajectories
// (nested prefixes of the same permutation); the labeled set is unchanged.
DatasetBundle with_obs_fraction(const DatasetBundle& bundle, double frac);

}  // namespace koap::harness

#endif  // KOAP_HARNESS_DATASET_HPP_
