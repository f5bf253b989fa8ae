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

#ifndef KOAP_NUMERICS_CHECKPOINT_HPP_
#define KOAP_NUMERICS_CHECKPOINT_HPP_

#include <string>

#include "koap/numerics/param_vector.hpp"

namespace koap::numerics {

// Checkpoint file layout: 8-byte magic, u64 little-endian header length, a
// JSON header ({"segments": [{name, offset, shape}...], "extra": ...}), then
// the parameter values as raw little-endian doubles. "extra" carries the
// model spec that produced the parameters.
struct Checkpoint {
  ParamVector params;
  std::string extra_json;
};

void save_checkpoint(const std::string& path, const ParamVector& params,
                     const std::string& extra_json);

Checkpoint load_checkpoint(const std::string& path);

}  // namespace koap::numerics

#endif  // KOAP_NUMERICS_CHECKPOINT_HPP_
