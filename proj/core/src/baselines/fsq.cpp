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

#include "koap/baselines/fsq.hpp"

#include <cmath>

namespace koap::baselines {

long FsqSpec::codebook_size() const {
  long n = 1;
  for (int l : levels) n *= l;
  return n;
}

void FsqSpec::validate() const {
  if (levels.empty()) throw ConfigError("fsq needs at least one level");
  for (int l : levels) {
    if (l < 2) throw ConfigError("fsq levels must be >= 2");
  }
}

Vec fsq_quantize(const FsqSpec& spec, const Vec& v) {
  spec.validate();
  if (v.size() != spec.dim()) throw ConfigError("fsq input dim mismatch");
  Vec q(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    const double h = spec.half_width(static_cast<std::size_t>(i));
    const double shift = spec.levels[static_cast<std::size_t>(i)] % 2 == 0
                             ? 0.5
                             : 0.0;
    double clamped = std::min(std::max(v[i], -h), h);
    q[i] = std::round(clamped - shift) + shift;
    q[i] = std::min(std::max(q[i], -h), h);
  }
  return q;
}

long fsq_code_index(const FsqSpec& spec, const Vec& q) {
  long idx = 0;
  for (Index i = 0; i < q.size(); ++i) {
    const std::size_t si = static_cast<std::size_t>(i);
    const double h = spec.half_width(si);
    long level = static_cast<long>(std::llround(q[i] + h));
    if (level < 0 || level >= spec.levels[si]) {
      throw ConfigError("fsq_code_index input is not on the grid");
    }
    idx = idx * spec.levels[si] + level;
  }
  return idx;
}

numerics::Tape::NodeId fsq_quantize_st(numerics::Tape& tape,
                                       const FsqSpec& spec,
                                       numerics::Tape::NodeId v) {
  return tape.map_identity_grad(
      v, [&spec](const Vec& x) { return fsq_quantize(spec, x); });
}

}  // namespace koap::baselines
