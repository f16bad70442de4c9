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

#include "whyact/model.h"

#include <cassert>

namespace whyact {

double Dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

FactorMask AllFactors() { return FactorMask().set(); }

FactorMask NoTrinaryFactors() {
  FactorMask mask;
  const auto &list = DefaultFactorList();
  for (int f = 0; f < kNumFactors; ++f) mask[f] = list[f].arity() < 3;
  return mask;
}

Model Model::Zero(const std::array<int, kNumConcepts> &dims, int feature_dim) {
  Model m;
  m.feature_dim = feature_dim;
  for (int c = 0; c < kNumConcepts; ++c) m.weights[c] = Matrix(dims[c], feature_dim);
  return m;
}

}  // namespace whyact
