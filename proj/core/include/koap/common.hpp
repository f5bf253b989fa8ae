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

#ifndef KOAP_COMMON_HPP_
#define KOAP_COMMON_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace koap {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;
using Rng = std::mt19937_64;

// Error taxonomy. Everything derives from Error so callers can catch the
// whole family at module boundaries (the experiment matrix does).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad specs, shape mismatches, invalid config files.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// State windows that are too short or malformed.
class WindowError : public Error {
 public:
  using Error::Error;
};

// Non-finite losses, gradients, or parameters.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Operations that require action labels called on unlabeled data.
class LabelError : public Error {
 public:
  using Error::Error;
};

// Misuse of an environment or rollout protocol (e.g. stepping a finished
// episode).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Failures inside reference oracles (rank-deficient regressions etc.).
class OracleError : public Error {
 public:
  using Error::Error;
};

// Experiment orchestration failures (missing checkpoints, bad cells).
class OrchestrationError : public Error {
 public:
  using Error::Error;
};

// SplitMix64. Used to derive independent stream seeds from one master seed
// so that experiment cells stay reproducible in isolation.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return splitmix64(seed ^ h);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t n) {
  return splitmix64(seed ^ (0x9e3779b97f4a7c15ULL + n));
}

}  // namespace koap

#endif  // KOAP_COMMON_HPP_
