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

#ifndef KOAP_NUMERICS_PARAM_VECTOR_HPP_
#define KOAP_NUMERICS_PARAM_VECTOR_HPP_

#include <string>
#include <unordered_map>
#include <vector>

#include "koap/common.hpp"

namespace koap::numerics {

// Flat parameter storage with named, disjoint segments. Each model component
// addresses its own block through a Segment handle; the optimizer and the
// checkpoint writer see one contiguous array.
class ParamVector {
 public:
  struct Segment {
    std::string name;
    Index offset = 0;
    std::vector<Index> shape;  // 1 or 2 dims; matrices are column-major

    Index size() const {
      Index n = 1;
      for (Index d : shape) n *= d;
      return n;
    }
    Index rows() const { return shape.empty() ? 0 : shape[0]; }
    Index cols() const { return shape.size() > 1 ? shape[1] : 1; }
  };

  class Builder {
   public:
    // Returns the segment handle; handles stay valid for the built vector.
    Segment add(std::string name, std::vector<Index> shape);
    ParamVector build() const;

   private:
    std::vector<Segment> segments_;
    Index total_ = 0;
  };

  ParamVector() = default;

  Index size() const { return values_.size(); }
  Vec& values() { return values_; }
  const Vec& values() const { return values_; }

  const std::vector<Segment>& segments() const { return segments_; }
  const Segment& segment(std::string_view name) const;
  bool has_segment(std::string_view name) const;

  Eigen::Map<const Mat> mat(const Segment& s) const {
    return {values_.data() + s.offset, s.rows(), s.cols()};
  }
  Eigen::Map<Mat> mat(const Segment& s) {
    return {values_.data() + s.offset, s.rows(), s.cols()};
  }
  Eigen::Map<const Vec> vec(const Segment& s) const {
    return {values_.data() + s.offset, s.size()};
  }
  Eigen::Map<Vec> vec(const Segment& s) {
    return {values_.data() + s.offset, s.size()};
  }

  // Name of the segment containing flat index i, for diagnostics.
  const std::string& segment_name_at(Index i) const;

 private:
  friend class Builder;
  Vec values_;
  std::vector<Segment> segments_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace koap::numerics

#endif  // KOAP_NUMERICS_PARAM_VECTOR_HPP_
