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

#ifndef KOAP_HARNESS_MATRIX_HPP_
#define KOAP_HARNESS_MATRIX_HPP_

#include <string>
#include <vector>

#include "koap/harness/evaluate.hpp"

namespace koap::harness {

struct MatrixRow {
  std::string method;
  int level = 0;
  double obs_fraction = 1.0;
  std::uint64_t seed = 0;
  double success = 0.0;
};

struct MatrixFailure {
  std::string method;
  int level = 0;
  double obs_fraction = 1.0;
  std::uint64_t seed = 0;
  std::string error;
};

struct MatrixResult {
  std::vector<MatrixRow> rows;
  std::vector<MatrixFailure> failures;
  std::string csv_path;
  std::string summary_path;
};

// Trains and evaluates {methods} x {levels} x {obs fractions} x {seeds}.
// Each cell writes its own file under out_dir/cells first, so a re-run
// recomputes only missing cells; cell failures are recorded and the matrix
// continues. The merged CSV and summary are rewritten deterministically.
MatrixResult run_matrix(const HarnessConfig& cfg);

std::string format_csv(const std::vector<MatrixRow>& rows);

}  // namespace koap::harness

#endif  // KOAP_HARNESS_MATRIX_HPP_
