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

#ifndef KOAP_NUMERICS_TAPE_HPP_
#define KOAP_NUMERICS_TAPE_HPP_

#include <cstdint>
#include <functional>
#include <vector>

#include "koap/common.hpp"
#include "koap/numerics/param_vector.hpp"

namespace koap::numerics {

// Reverse-mode autodiff over vector-valued nodes. A graph is rebuilt per
// training step; losses accumulate as weighted squared norms / sums of node
// values, and backward() pushes adjoints into a flat gradient aligned with
// the bound ParamVector.
//
// Builders must read parameters only through tape ops (linear/matvec/param),
// never from the ParamVector directly — gradient checking re-binds the same
// builder to perturbed copies.
class Tape {
 public:
  using NodeId = std::int32_t;

  explicit Tape(const ParamVector& params) : params_(&params) {}

  const ParamVector& params() const { return *params_; }

  NodeId constant(Vec v);
  // Parameter segment used directly as a vector value.
  NodeId param(const ParamVector::Segment& s);
  // y = W x (+ b). W is (rows x cols) column-major within its segment.
  NodeId linear(const ParamVector::Segment& w, const ParamVector::Segment& b,
                NodeId x);
  NodeId matvec(const ParamVector::Segment& w, NodeId x);

  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId hadamard(NodeId a, NodeId b);
  NodeId scale(NodeId a, double s);
  NodeId slice(NodeId a, Index offset, Index len);
  NodeId concat(NodeId a, NodeId b);

  NodeId tanh(NodeId a);
  NodeId sigmoid(NodeId a);
  NodeId relu(NodeId a);
  NodeId exp(NodeId a);

  // Arbitrary forward map with straight-through (identity) gradient.
  NodeId map_identity_grad(NodeId a, const std::function<Vec(const Vec&)>& f);

  // loss += w * ||value(r)||^2
  void add_squared_norm(NodeId r, double w);
  // loss += w * sum(value(v))
  void add_sum(NodeId v, double w);
  void add_constant(double c) { loss_ += c; }

  double loss() const { return loss_; }
  const Vec& value(NodeId id) const { return nodes_[id].value; }
  std::size_t node_count() const { return nodes_.size(); }

  // Accumulates d(loss)/d(params) into grad (must be params().size() long).
  void backward(Vec& grad) const;

  // Clears the graph and loss terms; keeps the parameter binding.
  void reset();

 private:
  enum class Op : std::uint8_t {
    kConst,
    kParam,
    kLinear,   // with optional bias
    kAdd,
    kSub,
    kHadamard,
    kScale,
    kSlice,
    kConcat,
    kTanh,
    kSigmoid,
    kRelu,
    kExp,
    kIdentityGrad,
  };

  struct Node {
    Op op;
    NodeId a = -1;
    NodeId b = -1;
    Index w_off = -1, rows = 0, cols = 0;  // kLinear / kParam
    Index b_off = -1;
    Index off = 0, len = 0;  // kSlice
    double s = 1.0;          // kScale
    Vec value;
  };

  struct LossTerm {
    NodeId node;
    double w;
    bool squared;  // true: w*||v||^2, false: w*sum(v)
  };

  NodeId push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size() - 1);
  }
  const Vec& val(NodeId id) const { return nodes_[id].value; }

  const ParamVector* params_;
  std::vector<Node> nodes_;
  std::vector<LossTerm> terms_;
  double loss_ = 0.0;
};

}  // namespace koap::numerics

#endif  // KOAP_NUMERICS_TAPE_HPP_
