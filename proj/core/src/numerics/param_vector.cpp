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

#include "koap/numerics/param_vector.hpp"

namespace koap::numerics {

ParamVector::Segment ParamVector::Builder::add(std::string name,
                                               std::vector<Index> shape) {
  if (shape.empty() || shape.size() > 2) {
    throw ConfigError("param segment '" + name + "' must be 1- or 2-d");
  }
  for (Index d : shape) {
    if (d < 1) throw ConfigError("param segment '" + name + "' has empty dim");
  }
  for (const auto& s : segments_) {
    if (s.name == name) throw ConfigError("duplicate param segment '" + name + "'");
  }
  Segment s{std::move(name), total_, std::move(shape)};
  total_ += s.size();
  segments_.push_back(s);
  return s;
}

ParamVector ParamVector::Builder::build() const {
  ParamVector p;
  p.values_ = Vec::Zero(total_);
  p.segments_ = segments_;
  for (std::size_t i = 0; i < p.segments_.size(); ++i) {
    p.index_[p.segments_[i].name] = i;
  }
  return p;
}

const ParamVector::Segment& ParamVector::segment(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) {
    throw ConfigError("unknown param segment '" + std::string(name) + "'");
  }
  return segments_[it->second];
}

bool ParamVector::has_segment(std::string_view name) const {
  return index_.find(std::string(name)) != index_.end();
}

const std::string& ParamVector::segment_name_at(Index i) const {
  for (const auto& s : segments_) {
    if (i >= s.offset && i < s.offset + s.size()) return s.name;
  }
  static const std::string kNone = "<none>";
  return kNone;
}

}  // namespace koap::numerics
