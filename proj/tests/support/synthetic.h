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

#ifndef WHYACT_TESTS_SUPPORT_SYNTHETIC_H_
#define WHYACT_TESTS_SUPPORT_SYNTHETIC_H_

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "whyact/dataset.h"
#include "whyact/graph.h"
#include "whyact/knowledge.h"

namespace whyact::testing {

struct WorldOptions {
  std::array<int, kNumConcepts> dims{10, 4, 6, 8};
  int feature_dim = 20;
  // Prototype scale per concept in the feature generator; noise is unit.
  std::array<double, kNumConcepts> signal{0.25, 0.9, 0.9, 0.9};
  uint64_t seed = 1;
};

// A ground-truth joint distribution over (m, a, o, s) in which the
// motivation depends on (a, o) and (a, s) jointly, plus a feature
// generator that is only weakly informative about each concept.
struct World {
  WorldOptions options;
  std::vector<double> joint;  // flat, m slowest, s fastest; sums to 1
  std::array<Matrix, kNumConcepts> prototypes;

  double p(const Configuration &y) const;
};

World MakeWorld(const WorldOptions &options);

// Standardized log co-occurrence tensors of the joint, one per default
// factor.
std::vector<PotentialTensor> CooccurrenceTensors(const World &world);
GraphSpec WorldGraph(const World &world);

std::vector<Example> SampleExamples(const World &world, size_t n, std::mt19937_64 &rng,
                                    const std::string &prefix);

// Vocabularies with generated terms ("motivation 0", ...).
VocabularySet WorldVocabularies(const World &world);

}  // namespace whyact::testing

#endif  // WHYACT_TESTS_SUPPORT_SYNTHETIC_H_
