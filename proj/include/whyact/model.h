// Copyright 2026 The Whyact Authors.
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

#ifndef WHYACT_MODEL_H_
#define WHYACT_MODEL_H_

#include <array>
#include <bitset>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "whyact/knowledge.h"

namespace whyact {

// Row-major dense matrix.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}

  std::span<double> row(int r) {
    return {data.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)};
  }
  std::span<const double> row(int r) const {
    return {data.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)};
  }
  double &operator()(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }
};

double Dot(std::span<const double> a, std::span<const double> b);

using FactorMask = std::bitset<kNumFactors>;

// Mask with every default factor enabled, or every factor except the three
// trinaries.
FactorMask AllFactors();
FactorMask NoTrinaryFactors();

struct PassLog {
  int pass = 0;
  int constraints_added = 0;
  int working_set_size = 0;
  // Full objective at the parameters used for this pass's constraint search,
  // with exact slacks from loss-augmented inference.
  double primal_objective = 0.0;
  // Training 0-1 structured loss at those parameters.
  double training_loss = 0.0;
  // After the working-set QP re-solve (absent on the final pass).
  std::optional<double> working_set_objective;
  std::optional<double> dual_objective;
};

// Learned parameters: one classifier matrix per concept (M_i x D) plus the
// 13 language weights in DefaultFactorList order.
struct Model {
  int feature_dim = 0;
  std::array<Matrix, kNumConcepts> weights;
  std::array<double, kNumFactors> u{};
  FactorMask factor_mask = AllFactors();

  // Metadata.
  double C = 0.0;
  std::array<std::optional<uint64_t>, kNumConcepts> vocab_hashes;
  std::vector<Normalization> tensor_normalization;  // factor-list order
  std::vector<PassLog> training_log;

  static Model Zero(const std::array<int, kNumConcepts> &dims, int feature_dim);
};

}  // namespace whyact

#endif  // WHYACT_MODEL_H_
