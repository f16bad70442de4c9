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

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "whyact/error.h"
#include "whyact/learn.h"

namespace whyact {

namespace {

// Dual coordinate descent for one binary L1-loss SVM without bias term.
std::vector<double> TrainBinaryHinge(const std::vector<std::vector<double>> &x,
                                     const std::vector<int> &sign, double C, double tolerance,
                                     int max_iterations) {
  const size_t n = x.size();
  const size_t d = x.front().size();
  std::vector<double> w(d, 0.0);
  std::vector<double> alpha(n, 0.0);
  std::vector<double> q(n);
  for (size_t i = 0; i < n; ++i) q[i] = Dot(x[i], x[i]);
  for (int iter = 0; iter < max_iterations; ++iter) {
    double pg_max = -std::numeric_limits<double>::infinity();
    double pg_min = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < n; ++i) {
      if (q[i] <= 0.0) continue;
      const double g = sign[i] * Dot(w, x[i]) - 1.0;
      double pg = g;
      if (alpha[i] <= 0.0) {
        pg = std::min(g, 0.0);
      } else if (alpha[i] >= C) {
        pg = std::max(g, 0.0);
      }
      pg_max = std::max(pg_max, pg);
      pg_min = std::min(pg_min, pg);
      if (pg == 0.0) continue;
      const double old = alpha[i];
      alpha[i] = std::clamp(old - g / q[i], 0.0, C);
      const double step = (alpha[i] - old) * sign[i];
      for (size_t j = 0; j < d; ++j) w[j] += step * x[i][j];
    }
    if (pg_max - pg_min <= tolerance) break;
  }
  return w;
}

std::vector<PotentialTensor> ZeroTensors(const std::array<int, kNumConcepts> &dims) {
  std::vector<PotentialTensor> out;
  for (const Relation &r : DefaultFactorList()) {
    PotentialTensor t;
    t.relation = r;
    size_t cells = 1;
    for (ConceptKind k : r.kinds()) {
      t.dims.push_back(dims[Index(k)]);
      cells *= static_cast<size_t>(dims[Index(k)]);
    }
    t.values.assign(cells, 0.0);
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

std::vector<double> MulticlassModel::Scores(std::span<const double> features) const {
  if (static_cast<int>(features.size()) != weights.cols) {
    throw Error(ErrorCode::kInvalidArgument, "baseline expects " + std::to_string(weights.cols) +
                                                 " features, got " +
                                                 std::to_string(features.size()));
  }
  std::vector<double> out(static_cast<size_t>(weights.rows));
  for (int c = 0; c < weights.rows; ++c) out[c] = Dot(weights.row(c), features);
  return out;
}

int MulticlassModel::Predict(std::span<const double> features) const {
  const auto s = Scores(features);
  return static_cast<int>(std::max_element(s.begin(), s.end()) - s.begin());
}

GraphSpec OneConceptGraph(int num_classes, int feature_dim) {
  const std::array<int, kNumConcepts> dims{num_classes, 1, 1, 1};
  return GraphSpec(dims, ZeroTensors(dims), feature_dim);
}

MulticlassModel TrainMulticlass(const std::vector<std::vector<double>> &features,
                                const std::vector<int> &labels, int num_classes,
                                const MulticlassOptions &options) {
  if (features.empty()) throw Error(ErrorCode::kDataEmpty, "no training examples");
  if (features.size() != labels.size()) {
    throw Error(ErrorCode::kInvalidArgument, "features and labels differ in length");
  }
  if (!(options.C > 0.0)) throw Error(ErrorCode::kInvalidArgument, "need C > 0");
  const size_t d = features.front().size();
  std::vector<char> present(static_cast<size_t>(std::max(num_classes, 0)), 0);
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes) {
      throw Error(ErrorCode::kInvalidArgument, "label out of range");
    }
    if (features[i].size() != d) {
      throw Error(ErrorCode::kDataError, "feature length differs across examples");
    }
    present[labels[i]] = 1;
  }
  if (std::count(present.begin(), present.end(), 1) < 2) {
    throw Error(ErrorCode::kDataError, "multiclass training needs at least two classes");
  }

  MulticlassModel model;
  model.mode = options.mode;
  model.C = options.C;
  model.weights = Matrix(num_classes, static_cast<int>(d));
  if (options.mode == MulticlassMode::kOneVsRest) {
    std::vector<int> sign(labels.size());
    for (int c = 0; c < num_classes; ++c) {
      if (!present[c]) continue;  // absent classes keep zero weights
      for (size_t i = 0; i < labels.size(); ++i) sign[i] = labels[i] == c ? 1 : -1;
      const auto w =
          TrainBinaryHinge(features, sign, options.C, options.tolerance, options.max_iterations);
      std::copy(w.begin(), w.end(), model.weights.row(c).begin());
    }
    return model;
  }

  const GraphSpec spec = OneConceptGraph(num_classes, static_cast<int>(d));
  std::vector<Example> examples(features.size());
  for (size_t i = 0; i < features.size(); ++i) {
    examples[i].image_id = std::to_string(i);
    examples[i].features = features[i];
    examples[i].truth = MakeConfig(labels[i], 0, 0, 0);
  }
  TrainOptions to;
  to.C = options.C;
  to.eps = options.eps;
  to.K = options.K;
  to.max_passes = options.max_passes;
  to.factor_mask = FactorMask();
  const TrainResult r = TrainSsvm(spec, examples, to);
  model.weights = r.model.weights[Index(ConceptKind::kMotivation)];
  return model;
}

std::vector<double> AugmentWithOracle(std::span<const double> features, const Configuration &truth,
                                      uint8_t mask, const std::array<int, kNumConcepts> &dims) {
  std::vector<double> out(features.begin(), features.end());
  for (ConceptKind k : kAllConcepts) {
    if (!(mask & (1u << Index(k)))) continue;
    std::vector<double> code(static_cast<size_t>(dims[Index(k)]), 0.0);
    code.at(static_cast<size_t>(truth[k])) = 1.0;
    out.insert(out.end(), code.begin(), code.end());
  }
  return out;
}

std::vector<int> FoldAssignment(size_t n, int folds, uint64_t seed) {
  if (folds < 2 || static_cast<size_t>(folds) > n) {
    throw Error(ErrorCode::kInvalidArgument, "cannot make " + std::to_string(folds) +
                                                 " folds from " + std::to_string(n) + " examples");
  }
  std::vector<int> fold(n);
  const auto order = Permutation(n, seed);
  for (size_t i = 0; i < n; ++i) fold[order[i]] = static_cast<int>(i % folds);
  return fold;
}

CvResult SelectC(size_t n, const std::vector<double> &grid, int folds, uint64_t seed,
                 const std::function<double(const std::vector<size_t> &,
                                            const std::vector<size_t> &, double)> &evaluate) {
  if (grid.empty()) throw Error(ErrorCode::kInvalidArgument, "empty C grid");
  const auto fold = FoldAssignment(n, folds, seed);
  CvResult out;
  out.grid = grid;
  for (double c : grid) {
    std::vector<double> scores;
    for (int k = 0; k < folds; ++k) {
      std::vector<size_t> train, val;
      for (size_t i = 0; i < n; ++i) (fold[i] == k ? val : train).push_back(i);
      scores.push_back(evaluate(train, val, c));
    }
    double mean = 0.0;
    for (double s : scores) mean += s;
    mean /= static_cast<double>(scores.size());
    out.fold_scores.push_back(std::move(scores));
    out.mean_scores.push_back(mean);
  }
  const auto best = std::min_element(out.mean_scores.begin(), out.mean_scores.end());
  out.best_C = grid[static_cast<size_t>(best - out.mean_scores.begin())];
  return out;
}

}  // namespace whyact
