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

#ifndef WHYACT_LEARN_H_
#define WHYACT_LEARN_H_

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "whyact/dataset.h"
#include "whyact/graph.h"
#include "whyact/model.h"

namespace whyact {

// psi(y, x): for each concept c the block of label y_c holds phi(x); the
// last 13 entries hold the factor values L(y) in factor-list order.
// Flattened layout: [W_m (M1 x D) | W_a | W_o | W_s | u(13)], row-major.
struct JointFeature {
  Configuration y;
  std::span<const double> features;
  std::array<double, kNumFactors> factors{};

  // theta . psi for theta stored as a Model.
  double Dot(const Model &model) const;
  std::vector<double> Dense(const std::array<int, kNumConcepts> &dims) const;
};

JointFeature MakeJointFeature(const GraphSpec &spec, std::span<const double> features,
                              const Configuration &y, const FactorMask &mask = AllFactors());

size_t ThetaDim(const std::array<int, kNumConcepts> &dims, int feature_dim);
std::vector<double> FlattenTheta(const Model &model);

// 0-1 structured loss: 1 when any concept differs.
double Loss(const Configuration &y, const Configuration &h);

// One cached constraint theta.(psi(y) - psi(h)) >= 1 - xi for an example.
struct Constraint {
  Configuration h;
  std::array<double, kNumFactors> factor_delta{};  // L(y) - L(h), masked
  double alpha = 0.0;
};

struct WorkingSet {
  double C = 0.0;
  std::vector<std::vector<Constraint>> constraints;  // per example
  std::vector<double> slack_alpha;                   // C - sum(alpha), per example

  size_t size() const;
};

struct TrainOptions {
  double C = 1.0;
  double eps = 1e-3;
  int K = 10;
  int max_passes = 50;
  FactorMask factor_mask = AllFactors();
  int threads = 1;
  double qp_tolerance = 1e-8;
  int qp_max_sweeps = 200000;
};

struct TrainResult {
  Model model;
  WorkingSet working_set;
  bool converged = false;  // last pass added no constraint
};

// n-slack cutting-plane structured SVM. Each pass collects, per example,
// the K-best configurations other than the truth that violate their margin
// by more than eps, then re-solves the working-set QP in the dual.
// Throws kQpFailure if the QP does not reach qp_tolerance.
TrainResult TrainSsvm(const GraphSpec &spec, const std::vector<Example> &examples,
                      const TrainOptions &options);

// 1/2 |theta|^2 + C sum_n max_h [loss(y_n, h) - theta.(psi(y_n) - psi(h))]_+
// over all configurations, using exact loss-augmented inference.
double PrimalObjective(const GraphSpec &spec, const Model &model,
                       const std::vector<Example> &examples, double C);

// theta = sum alpha * (psi(y_n) - psi(h)), from scratch.
Model ReconstructFromDuals(const GraphSpec &spec, const std::vector<Example> &examples,
                           const WorkingSet &ws);

// Fraction of examples whose top-scoring configuration is not the truth.
double TrainingLoss(const GraphSpec &spec, const Model &model,
                    const std::vector<Example> &examples);

// --- Vision-only baselines --------------------------------------------------

enum class MulticlassMode { kOneVsRest, kCrammerSinger };

struct MulticlassModel {
  MulticlassMode mode = MulticlassMode::kOneVsRest;
  Matrix weights;  // classes x D
  double C = 0.0;
  // Concepts whose ground-truth one-hot codes were appended to the
  // features at training time (Relation mask), and their sizes.
  uint8_t oracle_mask = 0;
  std::array<int, kNumConcepts> oracle_dims{};

  std::vector<double> Scores(std::span<const double> features) const;
  int Predict(std::span<const double> features) const;  // ties -> lower index
};

struct MulticlassOptions {
  MulticlassMode mode = MulticlassMode::kOneVsRest;
  double C = 1.0;
  double tolerance = 1e-6;
  int max_iterations = 5000;
  // Crammer-Singer runs through TrainSsvm; these pass through.
  double eps = 1e-6;
  int K = 10;
  int max_passes = 200;
};

// Throws kDataError when fewer than two classes are present.
MulticlassModel TrainMulticlass(const std::vector<std::vector<double>> &features,
                                const std::vector<int> &labels, int num_classes,
                                const MulticlassOptions &options);

// Single-concept graph with no language factors; TrainSsvm on it is the
// Crammer-Singer multiclass SVM.
GraphSpec OneConceptGraph(int num_classes, int feature_dim);

// Appends one-hot codes of the ground-truth indices for the concepts in
// `mask`, in canonical concept order.
std::vector<double> AugmentWithOracle(std::span<const double> features, const Configuration &truth,
                                      uint8_t mask, const std::array<int, kNumConcepts> &dims);

// --- Model selection ---------------------------------------------------------

struct CvResult {
  double best_C = 0.0;
  std::vector<double> grid;
  std::vector<std::vector<double>> fold_scores;  // [grid index][fold]
  std::vector<double> mean_scores;
};

// k-fold assignment of n items; fold sizes differ by at most one.
std::vector<int> FoldAssignment(size_t n, int folds, uint64_t seed);

// Picks the C with the lowest mean validation score (ties -> earlier grid
// entry). `evaluate(train_idx, val_idx, C)` returns a score, lower better.
CvResult SelectC(size_t n, const std::vector<double> &grid, int folds, uint64_t seed,
                 const std::function<double(const std::vector<size_t> &,
                                            const std::vector<size_t> &, double)> &evaluate);

}  // namespace whyact

#endif  // WHYACT_LEARN_H_
