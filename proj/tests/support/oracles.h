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

#ifndef WHYACT_TESTS_SUPPORT_ORACLES_H_
#define WHYACT_TESTS_SUPPORT_ORACLES_H_

#include <optional>
#include <random>
#include <span>
#include <vector>

#include "whyact/graph.h"
#include "whyact/model.h"

namespace whyact::testing {

// Direct sum of every term of the scoring function for one configuration.
double BruteScore(const GraphSpec &spec, const Model &model, std::span<const double> x,
                  const Configuration &y);

// Every configuration in the clamp box by four nested loops, sorted by
// descending score with ties to the lexicographically smaller one.
std::vector<ScoredConfig> BruteRanking(const GraphSpec &spec, const Model &model,
                                       std::span<const double> x, const Clamp &clamp = {});

std::vector<double> BruteMaxMarginals(const GraphSpec &spec, const Model &model,
                                      std::span<const double> x, ConceptKind kind,
                                      const Clamp &clamp = {});

// Random graph with the given dims. Tensor and weight values are drawn
// from small integers when `integral` (forcing exact ties), else normals.
GraphSpec RandomGraph(std::mt19937_64 &rng, const std::array<int, kNumConcepts> &dims,
                      int feature_dim, bool integral);
Model RandomModel(std::mt19937_64 &rng, const GraphSpec &spec, bool integral);
std::vector<double> RandomFeatures(std::mt19937_64 &rng, int dim, bool integral);

// Eigenpairs of a symmetric matrix by cyclic Jacobi rotations, sorted by
// descending eigenvalue. vectors[i] pairs with values[i].
struct EigenPairs {
  std::vector<double> values;
  std::vector<std::vector<double>> vectors;
};
EigenPairs JacobiEigen(std::vector<std::vector<double>> a);

}  // namespace whyact::testing

#endif  // WHYACT_TESTS_SUPPORT_ORACLES_H_
