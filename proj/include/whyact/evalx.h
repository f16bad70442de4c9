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

#ifndef WHYACT_EVALX_H_
#define WHYACT_EVALX_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "whyact/dataset.h"
#include "whyact/graph.h"
#include "whyact/learn.h"

namespace whyact {

struct RankRecord {
  std::string image_id;
  int truth = 0;
  int rank = 1;  // 1 = best
};

// 1 + number of entries that beat scores[truth]; an equal score beats it
// only from a lower index.
int RankFromScores(std::span<const double> scores, int truth);

// Rank of truth_m among the motivation max-marginals, optionally with some
// concepts clamped.
RankRecord RankMotivation(const GraphSpec &spec, const Model &model,
                          std::span<const double> features, int truth_m, const Clamp &clamp = {});

struct CategoryRank {
  int category = 0;
  int count = 0;
  double mean_rank = 0.0;
};

// Mean rank per ground-truth category, in category order.
std::vector<CategoryRank> CategoryMeans(const std::vector<RankRecord> &records);

// Median over categories of the per-category mean rank; the lower median
// for an even number of categories. Throws kDataEmpty on no records.
double NormalizedMedianRank(const std::vector<RankRecord> &records);

// accuracy[K-1] = fraction of records with rank <= K, for K = 1..num_classes.
std::vector<double> AccuracyCurve(const std::vector<RankRecord> &records, int num_classes);

struct EvalMode {
  enum class Kind { kAutomatic, kClamp, kNoTrinary };
  Kind kind = Kind::kAutomatic;
  uint8_t clamp_mask = 0;  // Relation mask over action, object, scene

  // "Fully Automatic", "Action+Object+Scene", ..., "no-trinary".
  std::string Tag() const;
  // Accepts "automatic", "no-trinary", or "clamp:<relation>" where the
  // relation is a nonempty subset of action/object/scene ("clamp:a+o+s").
  static EvalMode Parse(std::string_view text);
  static EvalMode Clamped(uint8_t mask);
};

struct EvalReport {
  std::string method;  // "full", "one-vs-rest", "crammer-singer"
  std::string mode_tag;
  std::string rank_normalization =
      "median over categories of per-category mean rank (lower median)";
  int num_classes = 0;
  double normalized_median_rank = 0.0;
  double mean_rank = 0.0;
  std::vector<CategoryRank> categories;
  std::vector<double> accuracy;  // K = 1..num_classes
  std::vector<RankRecord> records;
};

EvalReport MakeReport(std::string method, std::string mode_tag, int num_classes,
                      std::vector<RankRecord> records);

// Full model. Clamp modes fix the chosen concepts to ground truth; the
// no-trinary mode zeroes the trinary weights at inference.
EvalReport RunProtocol(const GraphSpec &spec, const Model &model, const std::vector<Example> &test,
                       const EvalMode &mode, int threads = 1);

// Vision-only baseline. In clamp modes the model must have been trained on
// features augmented with the same ground-truth concepts.
EvalReport RunBaselineProtocol(const MulticlassModel &model,
                               const std::array<int, kNumConcepts> &dims,
                               const std::vector<Example> &test, const EvalMode &mode,
                               int threads = 1);

void WriteReportJson(std::ostream &out, const EvalReport &report,
                     const Vocabulary *motivations = nullptr);
void WriteReportText(std::ostream &out, const EvalReport &report,
                     const Vocabulary *motivations = nullptr);
void WriteAccuracyCsv(std::ostream &out, const EvalReport &report);

}  // namespace whyact

#endif  // WHYACT_EVALX_H_
