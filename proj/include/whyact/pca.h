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

#ifndef WHYACT_PCA_H_
#define WHYACT_PCA_H_

#include <span>
#include <vector>

#include "whyact/model.h"

namespace whyact {

inline constexpr int kDefaultPcaDim = 100;

// Mean-centred projection onto the leading eigenvectors of the sample
// covariance. Each component's largest-magnitude coordinate is positive.
struct PcaProjection {
  std::vector<double> mean;                // length D_raw
  Matrix components;                       // k x D_raw, orthonormal rows
  std::vector<double> explained_variance;  // non-increasing, length k
  // Trailing components that are zero rows because the data has too few
  // samples or dimensions to support them.
  int padded_components = 0;

  int input_dim() const { return static_cast<int>(mean.size()); }
  int output_dim() const { return components.rows; }
};

// rows: n x D_raw. Throws kDataError when all rows are identical.
PcaProjection PcaFit(const Matrix &rows, int k = kDefaultPcaDim);
std::vector<double> PcaApply(const PcaProjection &p, std::span<const double> x);

}  // namespace whyact

#endif  // WHYACT_PCA_H_
