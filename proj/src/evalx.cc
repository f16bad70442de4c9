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

#include "whyact/evalx.h"

#include <algorithm>
#include <cstdio>
#include <map>

#include "json.hpp"
#include "whyact/error.h"
#include "whyact/parallel.h"

namespace whyact {

using nlohmann::json;

int RankFromScores(std::span<const double> scores, int truth) {
  const double t = scores[static_cast<size_t>(truth)];
  int rank = 1;
  for (size_t j = 0; j < scores.size(); ++j) {
    if (scores[j] > t || (scores[j] == t && static_cast<int>(j) < truth)) ++rank;
  }
  return rank;
}

RankRecord RankMotivation(const GraphSpec &spec, const Model &model,
                          std::span<const double> features, int truth_m, const Clamp &clamp) {
  const ScoreTable table(spec, model, features, clamp);
  RankRecord r;
  r.truth = truth_m;
  r.rank = RankFromScores(table.MaxMarginals(ConceptKind::kMotivation), truth_m);
  return r;
}

std::vector<CategoryRank> CategoryMeans(const std::vector<RankRecord> &records) {
  std::map<int, std::pair<int, double>> acc;
  for (const auto &r : records) {
    auto &[count, sum] = acc[r.truth];
    ++count;
    sum += r.rank;
  }
  std::vector<CategoryRank> out;
  for (const auto &[cat, cs] : acc) {
    out.push_back({cat, cs.first, cs.second / cs.first});
  }
  return out;
}

double NormalizedMedianRank(const std::vector<RankRecord> &records) {
  if (records.empty()) throw Error(ErrorCode::kDataEmpty, "no rank records");
  std::vector<double> means;
  for (const auto &c : CategoryMeans(records)) means.push_back(c.mean_rank);
  std::sort(means.begin(), means.end());
  return means[(means.size() - 1) / 2];
}

std::vector<double> AccuracyCurve(const std::vector<RankRecord> &records, int num_classes) {
  if (records.empty()) throw Error(ErrorCode::kDataEmpty, "no rank records");
  std::vector<int> hits(static_cast<size_t>(num_classes) + 1, 0);
  for (const auto &r : records) {
    if (r.rank < 1 || r.rank > num_classes) {
      throw Error(ErrorCode::kInvalidArgument, "rank outside 1.." + std::to_string(num_classes));
    }
    ++hits[r.rank];
  }
  std::vector<double> out(static_cast<size_t>(num_classes));
  int cumulative = 0;
  for (int k = 1; k <= num_classes; ++k) {
    cumulative += hits[k];
    out[k - 1] = static_cast<double>(cumulative) / static_cast<double>(records.size());
  }
  return out;
}

std::string EvalMode::Tag() const {
  switch (kind) {
    case Kind::kAutomatic:
      return "Fully Automatic";
    case Kind::kNoTrinary:
      return "no-trinary";
    case Kind::kClamp:
      break;
  }
  std::string out;
  for (ConceptKind k : Relation::FromMask(clamp_mask).kinds()) {
    std::string name(ConceptName(k));
    name[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
    if (!out.empty()) out += '+';
    out += name;
  }
  return out;
}

EvalMode EvalMode::Clamped(uint8_t mask) {
  const uint8_t motivation = 1u << Index(ConceptKind::kMotivation);
  if (mask == 0 || (mask & motivation) || mask >= (1u << kNumConcepts)) {
    throw Error(ErrorCode::kInvalidArgument,
                "clamp must be a nonempty subset of action, object, scene");
  }
  EvalMode m;
  m.kind = Kind::kClamp;
  m.clamp_mask = mask;
  return m;
}

EvalMode EvalMode::Parse(std::string_view text) {
  if (text == "automatic") return {};
  if (text == "no-trinary") return {Kind::kNoTrinary, 0};
  constexpr std::string_view kPrefix = "clamp:";
  if (text.substr(0, kPrefix.size()) == kPrefix) {
    const auto r = Relation::Parse(text.substr(kPrefix.size()));
    if (r) return Clamped(r->mask());
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown eval mode '" + std::string(text) +
                  "' (expected automatic, no-trinary or clamp:<a+o+s subset>)");
}

EvalReport MakeReport(std::string method, std::string mode_tag, int num_classes,
                      std::vector<RankRecord> records) {
  EvalReport r;
  r.method = std::move(method);
  r.mode_tag = std::move(mode_tag);
  r.num_classes = num_classes;
  r.normalized_median_rank = NormalizedMedianRank(records);
  double sum = 0.0;
  for (const auto &x : records) sum += x.rank;
  r.mean_rank = sum / static_cast<double>(records.size());
  r.categories = CategoryMeans(records);
  r.accuracy = AccuracyCurve(records, num_classes);
  r.records = std::move(records);
  return r;
}

namespace {

Clamp ClampFor(const EvalMode &mode, const Configuration &truth) {
  Clamp clamp;
  if (mode.kind != EvalMode::Kind::kClamp) return clamp;
  for (ConceptKind k : Relation::FromMask(mode.clamp_mask).kinds()) clamp[Index(k)] = truth[k];
  return clamp;
}

void CheckTestSet(const std::vector<Example> &test) {
  if (test.empty()) throw Error(ErrorCode::kDataEmpty, "empty test set");
}

}  // namespace

EvalReport RunProtocol(const GraphSpec &spec, const Model &model, const std::vector<Example> &test,
                       const EvalMode &mode, int threads) {
  CheckTestSet(test);
  Model used = model;
  if (mode.kind == EvalMode::Kind::kNoTrinary) {
    const FactorMask keep = NoTrinaryFactors();
    for (int f = 0; f < kNumFactors; ++f) {
      if (!keep[f]) used.u[f] = 0.0;
    }
  }
  std::vector<RankRecord> records(test.size());
  ParallelFor(test.size(), threads, [&](size_t i) {
    const Example &ex = test[i];
    if (static_cast<int>(ex.features.size()) != spec.feature_dim()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "test image '" + ex.image_id + "' has feature length " +
                      std::to_string(ex.features.size()) + ", model expects " +
                      std::to_string(spec.feature_dim()));
    }
    records[i] = RankMotivation(spec, used, ex.features, ex.truth[ConceptKind::kMotivation],
                                ClampFor(mode, ex.truth));
    records[i].image_id = ex.image_id;
  });
  return MakeReport("full", mode.Tag(), spec.dim(ConceptKind::kMotivation), std::move(records));
}

EvalReport RunBaselineProtocol(const MulticlassModel &model,
                               const std::array<int, kNumConcepts> &dims,
                               const std::vector<Example> &test, const EvalMode &mode,
                               int threads) {
  CheckTestSet(test);
  if (mode.kind == EvalMode::Kind::kNoTrinary) {
    throw Error(ErrorCode::kInvalidArgument, "the no-trinary mode applies to the full model only");
  }
  const uint8_t wanted = mode.kind == EvalMode::Kind::kClamp ? mode.clamp_mask : 0;
  if (wanted != model.oracle_mask) {
    throw Error(ErrorCode::kInvalidArgument,
                "baseline was trained with oracle concepts '" +
                    (model.oracle_mask ? Relation::FromMask(model.oracle_mask).Name()
                                       : std::string("none")) +
                    "' but the mode asks for '" + mode.Tag() + "'");
  }
  std::vector<RankRecord> records(test.size());
  ParallelFor(test.size(), threads, [&](size_t i) {
    const Example &ex = test[i];
    const auto x = AugmentWithOracle(ex.features, ex.truth, wanted, dims);
    records[i].image_id = ex.image_id;
    records[i].truth = ex.truth[ConceptKind::kMotivation];
    records[i].rank = RankFromScores(model.Scores(x), records[i].truth);
  });
  const std::string method =
      model.mode == MulticlassMode::kOneVsRest ? "one-vs-rest" : "crammer-singer";
  return MakeReport(method, mode.Tag(), model.weights.rows, std::move(records));
}

namespace {

std::string CategoryName(int c, const Vocabulary *motivations) {
  if (motivations && c < motivations->size()) return motivations->term(c);
  return std::to_string(c);
}

}  // namespace

void WriteReportJson(std::ostream &out, const EvalReport &report, const Vocabulary *motivations) {
  json j;
  j["version"] = "why-report/1";
  j["method"] = report.method;
  j["mode"] = report.mode_tag;
  j["rank_normalization"] = report.rank_normalization;
  j["num_classes"] = report.num_classes;
  j["num_images"] = report.records.size();
  j["normalized_median_rank"] = report.normalized_median_rank;
  j["mean_rank"] = report.mean_rank;
  json cats = json::array();
  for (const auto &c : report.categories) {
    cats.push_back({{"category", CategoryName(c.category, motivations)},
                    {"index", c.category},
                    {"count", c.count},
                    {"mean_rank", c.mean_rank}});
  }
  j["categories"] = cats;
  j["accuracy_at_k"] = report.accuracy;
  json recs = json::array();
  for (const auto &r : report.records) {
    recs.push_back({{"image_id", r.image_id},
                    {"truth", CategoryName(r.truth, motivations)},
                    {"rank", r.rank}});
  }
  j["records"] = recs;
  out << j.dump(1) << '\n';
}

void WriteReportText(std::ostream &out, const EvalReport &report, const Vocabulary *motivations) {
  char buf[256];
  out << "method: " << report.method << "\n";
  out << "mode: " << report.mode_tag << "\n";
  out << "images: " << report.records.size() << "\n";
  std::snprintf(buf, sizeof buf, "normalized median rank: %.2f\nmean rank: %.2f\n",
                report.normalized_median_rank, report.mean_rank);
  out << buf;
  out << "rank normalization: " << report.rank_normalization << "\n\n";
  size_t width = 8;
  for (const auto &c : report.categories) {
    width = std::max(width, CategoryName(c.category, motivations).size());
  }
  std::snprintf(buf, sizeof buf, "%-*s %7s %10s\n", static_cast<int>(width), "category", "images",
                "mean rank");
  out << buf;
  for (const auto &c : report.categories) {
    std::snprintf(buf, sizeof buf, "%-*s %7d %10.2f\n", static_cast<int>(width),
                  CategoryName(c.category, motivations).c_str(), c.count, c.mean_rank);
    out << buf;
  }
  out << "\n";
  std::snprintf(buf, sizeof buf, "%5s %9s\n", "K", "accuracy");
  out << buf;
  for (size_t k = 0; k < report.accuracy.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%5zu %9.4f\n", k + 1, report.accuracy[k]);
    out << buf;
  }
}

void WriteAccuracyCsv(std::ostream &out, const EvalReport &report) {
  out << "K,accuracy\n";
  char buf[64];
  for (size_t k = 0; k < report.accuracy.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", k + 1, report.accuracy[k]);
    out << buf;
  }
}

}  // namespace whyact
