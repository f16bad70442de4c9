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

#ifndef WHYACT_GRAPH_H_
#define WHYACT_GRAPH_H_

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "whyact/knowledge.h"
#include "whyact/model.h"

namespace whyact {

// One joint assignment of (motivation, action, object, scene).
struct Configuration {
  std::array<int, kNumConcepts> y{};

  int operator[](ConceptKind k) const { return y[Index(k)]; }
  int &operator[](ConceptKind k) { return y[Index(k)]; }
  friend bool operator==(const Configuration &, const Configuration &) = default;
  friend auto operator<=>(const Configuration &, const Configuration &) = default;
};

Configuration MakeConfig(int m, int a, int o, int s);

struct ScoredConfig {
  Configuration config;
  double score = 0.0;
};

// Concepts fixed to given values; unset entries are free.
using Clamp = std::array<std::optional<int>, kNumConcepts>;

// The four-variable factor graph: vocabulary sizes, the 13 language
// tensors in DefaultFactorList order, and the image feature dimension.
class GraphSpec {
 public:
  GraphSpec() = default;
  // Tensors may come in any order; exactly one per default factor.
  GraphSpec(std::array<int, kNumConcepts> dims, std::vector<PotentialTensor> tensors,
            int feature_dim);

  const std::array<int, kNumConcepts> &dims() const { return dims_; }
  int dim(ConceptKind k) const { return dims_[Index(k)]; }
  int feature_dim() const { return feature_dim_; }
  const PotentialTensor &factor(int f) const { return factors_[f]; }
  size_t num_configs() const;

  // L_f(y) for every factor.
  std::array<double, kNumFactors> FactorValues(const Configuration &y) const;

  bool Contains(const Configuration &y) const;

 private:
  std::array<int, kNumConcepts> dims_{};
  std::array<PotentialTensor, kNumFactors> factors_;
  int feature_dim_ = 0;
};

// Omega(y): vision terms plus weighted language factors.
double ScoreConfig(const GraphSpec &spec, const Model &model, std::span<const double> features,
                   const Configuration &y);

// Scores of every configuration inside the clamp box, produced by staged
// accumulation over (m, a, o, s). Entries are in lexicographic order, which
// is also the tie-break order.
class ScoreTable {
 public:
  ScoreTable(const GraphSpec &spec, const Model &model, std::span<const double> features,
             const Clamp &clamp = {});

  size_t size() const { return scores_.size(); }
  double score(size_t i) const { return scores_[i]; }
  Configuration ConfigAt(size_t i) const;
  bool InBox(const Configuration &y) const;
  std::optional<size_t> IndexOf(const Configuration &y) const;

  // Top-K by score, ties to the lexicographically smaller configuration.
  std::vector<ScoredConfig> KBest(int k, const std::optional<Configuration> &exclude = {}) const;
  // Best score per value of `kind`; values outside the clamp get -inf.
  std::vector<double> MaxMarginals(ConceptKind kind) const;

 private:
  std::array<int, kNumConcepts> dims_{};
  std::array<int, kNumConcepts> lo_{};
  std::array<int, kNumConcepts> extent_{};
  std::vector<double> scores_;
};

std::vector<ScoredConfig> KBest(const GraphSpec &spec, const Model &model,
                                std::span<const double> features, int k,
                                const std::optional<Configuration> &exclude = {});

std::vector<double> MaxMarginals(const GraphSpec &spec, const Model &model,
                                 std::span<const double> features, ConceptKind kind);

std::vector<ScoredConfig> ClampedKBest(const GraphSpec &spec, const Model &model,
                                       std::span<const double> features, const Clamp &clamp, int k);

}  // namespace whyact

#endif  // WHYACT_GRAPH_H_
