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

#include "koap/numerics/tape.hpp"

namespace koap::numerics {

namespace {

void check_same_size(const Vec& a, const Vec& b, const char* op) {
  if (a.size() != b.size()) {
    throw ConfigError(std::string(op) + ": size mismatch " +
                      std::to_string(a.size()) + " vs " +
                      std::to_string(b.size()));
  }
}

}  // namespace

Tape::NodeId Tape::constant(Vec v) {
  Node n;
  n.op = Op::kConst;
  n.value = std::move(v);
  return push(std::move(n));
}

Tape::NodeId Tape::param(const ParamVector::Segment& s) {
  Node n;
  n.op = Op::kParam;
  n.w_off = s.offset;
  n.value = params_->vec(s);
  return push(std::move(n));
}

Tape::NodeId Tape::linear(const ParamVector::Segment& w,
                          const ParamVector::Segment& b, NodeId x) {
  if (w.cols() != val(x).size()) {
    throw ConfigError("linear '" + w.name + "': input size " +
                      std::to_string(val(x).size()) + " != cols " +
                      std::to_string(w.cols()));
  }
  if (b.size() != w.rows()) {
    throw ConfigError("linear '" + w.name + "': bias size mismatch");
  }
  Node n;
  n.op = Op::kLinear;
  n.a = x;
  n.w_off = w.offset;
  n.rows = w.rows();
  n.cols = w.cols();
  n.b_off = b.offset;
  n.value.noalias() = params_->mat(w) * val(x);
  n.value += params_->vec(b);
  return push(std::move(n));
}

Tape::NodeId Tape::matvec(const ParamVector::Segment& w, NodeId x) {
  if (w.cols() != val(x).size()) {
    throw ConfigError("matvec '" + w.name + "': input size mismatch");
  }
  Node n;
  n.op = Op::kLinear;
  n.a = x;
  n.w_off = w.offset;
  n.rows = w.rows();
  n.cols = w.cols();
  n.value.noalias() = params_->mat(w) * val(x);
  return push(std::move(n));
}

Tape::NodeId Tape::add(NodeId a, NodeId b) {
  check_same_size(val(a), val(b), "add");
  Node n;
  n.op = Op::kAdd;
  n.a = a;
  n.b = b;
  n.value = val(a) + val(b);
  return push(std::move(n));
}

Tape::NodeId Tape::sub(NodeId a, NodeId b) {
  check_same_size(val(a), val(b), "sub");
  Node n;
  n.op = Op::kSub;
  n.a = a;
  n.b = b;
  n.value = val(a) - val(b);
  return push(std::move(n));
}

Tape::NodeId Tape::hadamard(NodeId a, NodeId b) {
  check_same_size(val(a), val(b), "hadamard");
  Node n;
  n.op = Op::kHadamard;
  n.a = a;
  n.b = b;
  n.value = val(a).cwiseProduct(val(b));
  return push(std::move(n));
}

Tape::NodeId Tape::scale(NodeId a, double s) {
  Node n;
  n.op = Op::kScale;
  n.a = a;
  n.s = s;
  n.value = s * val(a);
  return push(std::move(n));
}

Tape::NodeId Tape::slice(NodeId a, Index offset, Index len) {
  if (offset < 0 || len < 0 || offset + len > val(a).size()) {
    throw ConfigError("slice out of range");
  }
  Node n;
  n.op = Op::kSlice;
  n.a = a;
  n.off = offset;
  n.len = len;
  n.value = val(a).segment(offset, len);
  return push(std::move(n));
}

Tape::NodeId Tape::concat(NodeId a, NodeId b) {
  Node n;
  n.op = Op::kConcat;
  n.a = a;
  n.b = b;
  n.value.resize(val(a).size() + val(b).size());
  n.value << val(a), val(b);
  return push(std::move(n));
}

Tape::NodeId Tape::tanh(NodeId a) {
  Node n;
  n.op = Op::kTanh;
  n.a = a;
  n.value = val(a).array().tanh();
  return push(std::move(n));
}

Tape::NodeId Tape::sigmoid(NodeId a) {
  Node n;
  n.op = Op::kSigmoid;
  n.a = a;
  n.value = (1.0 / (1.0 + (-val(a).array()).exp()));
  return push(std::move(n));
}

Tape::NodeId Tape::relu(NodeId a) {
  Node n;
  n.op = Op::kRelu;
  n.a = a;
  n.value = val(a).cwiseMax(0.0);
  return push(std::move(n));
}

Tape::NodeId Tape::exp(NodeId a) {
  Node n;
  n.op = Op::kExp;
  n.a = a;
  n.value = val(a).array().exp();
  return push(std::move(n));
}

Tape::NodeId Tape::map_identity_grad(NodeId a,
                                     const std::function<Vec(const Vec&)>& f) {
  Node n;
  n.op = Op::kIdentityGrad;
  n.a = a;
  n.value = f(val(a));
  check_same_size(n.value, val(a), "map_identity_grad");
  return push(std::move(n));
}

void Tape::add_squared_norm(NodeId r, double w) {
  terms_.push_back({r, w, true});
  loss_ += w * val(r).squaredNorm();
}

void Tape::add_sum(NodeId v, double w) {
  terms_.push_back({v, w, false});
  loss_ += w * val(v).sum();
}

void Tape::backward(Vec& grad) const {
  if (grad.size() != params_->size()) {
    throw ConfigError("gradient buffer size mismatch");
  }
  std::vector<Vec> adj(nodes_.size());
  auto touch = [&](NodeId id) -> Vec& {
    if (adj[id].size() == 0) adj[id] = Vec::Zero(nodes_[id].value.size());
    return adj[id];
  };
  for (const LossTerm& t : terms_) {
    if (t.squared) {
      touch(t.node) += 2.0 * t.w * nodes_[t.node].value;
    } else {
      touch(t.node).array() += t.w;
    }
  }
  for (std::int64_t i = static_cast<std::int64_t>(nodes_.size()) - 1; i >= 0;
       --i) {
    const Node& n = nodes_[i];
    if (adj[i].size() == 0) continue;  // no downstream influence
    const Vec& g = adj[i];
    switch (n.op) {
      case Op::kConst:
        break;
      case Op::kParam: {
        Eigen::Map<Vec>(grad.data() + n.w_off, n.value.size()) += g;
        break;
      }
      case Op::kLinear: {
        Eigen::Map<const Mat> w(params_->values().data() + n.w_off, n.rows,
                                n.cols);
        Eigen::Map<Mat> gw(grad.data() + n.w_off, n.rows, n.cols);
        gw.noalias() += g * val(n.a).transpose();
        if (n.b_off >= 0) {
          Eigen::Map<Vec>(grad.data() + n.b_off, n.rows) += g;
        }
        touch(n.a).noalias() += w.transpose() * g;
        break;
      }
      case Op::kAdd:
        touch(n.a) += g;
        touch(n.b) += g;
        break;
      case Op::kSub:
        touch(n.a) += g;
        touch(n.b) -= g;
        break;
      case Op::kHadamard:
        touch(n.a) += g.cwiseProduct(val(n.b));
        touch(n.b) += g.cwiseProduct(val(n.a));
        break;
      case Op::kScale:
        touch(n.a) += n.s * g;
        break;
      case Op::kSlice:
        touch(n.a).segment(n.off, n.len) += g;
        break;
      case Op::kConcat: {
        Index la = nodes_[n.a].value.size();
        touch(n.a) += g.head(la);
        touch(n.b) += g.tail(g.size() - la);
        break;
      }
      case Op::kTanh:
        touch(n.a).array() += g.array() * (1.0 - n.value.array().square());
        break;
      case Op::kSigmoid:
        touch(n.a).array() +=
            g.array() * n.value.array() * (1.0 - n.value.array());
        break;
      case Op::kRelu:
        touch(n.a).array() +=
            g.array() * (n.value.array() > 0.0).cast<double>();
        break;
      case Op::kExp:
        touch(n.a).array() += g.array() * n.value.array();
        break;
      case Op::kIdentityGrad:
        touch(n.a) += g;
        break;
    }
  }
}

void Tape::reset() {
  nodes_.clear();
  terms_.clear();
  loss_ = 0.0;
}

}  // namespace koap::numerics
