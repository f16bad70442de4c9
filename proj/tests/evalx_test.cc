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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "json.hpp"
#include "support/oracles.h"
#include "support/synthetic.h"
#include "whyact/error.h"

namespace whyact {
namespace {

using K = ConceptKind;

std::vector<RankRecord> Records(const std::vector<std::pair<int, int>> &truth_rank) {
  std::vector<RankRecord> out;
  for (const auto &[t, r] : truth_rank) out.push_back({"i" + std::to_string(out.size()), t, r});
  return out;
}

int BruteRank(const GraphSpec &spec, const Model &model, std::span<const double> x, int truth,
              const Clamp &clamp = {}) {
  const auto mm = testing::BruteMaxMarginals(spec, model, x, K::kMotivation, clamp);
  int rank = 1;
  for (int j = 0; j < static_cast<int>(mm.size()); ++j) {
    if (mm[j] > mm[truth] || (mm[j] == mm[truth] && j < truth)) ++rank;
  }
  return rank;
}

TEST(Rank, TieRule) {
  EXPECT_EQ(RankFromScores(std::vector<double>{0.1, 3.0, -1.0}, 1), 1);
  const std::vector<double> flat(8, 2.5);
  EXPECT_EQ(RankFromScores(flat, 0), 1);
  EXPECT_EQ(RankFromScores(flat, 5), 6);
  EXPECT_EQ(RankFromScores(std::vector<double>{1.0, 2.0, 2.0, 2.0}, 2), 2);
}

TEST(Rank, MatchesBruteForce) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const bool integral = trial % 2 == 0;
    const GraphSpec spec = testing::RandomGraph(rng, {2, 2, 2, 2}, 3, integral);
    const Model model = testing::RandomModel(rng, spec, integral);
    const auto x = testing::RandomFeatures(rng, 3, integral);
    const int truth = static_cast<int>(rng() % 2);
    EXPECT_EQ(RankMotivation(spec, model, x, truth).rank, BruteRank(spec, model, x, truth));
    const Clamp clamp = {std::nullopt, static_cast<int>(rng() % 2), std::nullopt,
                         static_cast<int>(rng() % 2)};
    EXPECT_EQ(RankMotivation(spec, model, x, truth, clamp).rank,
              BruteRank(spec, model, x, truth, clamp));
  }
}

TEST(Rank, InvariantUnderIncreasingTransforms) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const GraphSpec spec = testing::RandomGraph(rng, {6, 3, 3, 4}, 4, trial % 2 == 0);
    Model model = testing::RandomModel(rng, spec, trial % 2 == 0);
    const auto x = testing::RandomFeatures(rng, 4, false);
    const int truth = static_cast<int>(rng() % 6);
    const auto mm = MaxMarginals(spec, model, x, K::kMotivation);
    const int rank = RankFromScores(mm, truth);
    std::vector<double> warped;
    for (double v : mm) warped.push_back(std::exp(0.3 * v) * 7.0 - 2.0);
    EXPECT_EQ(RankFromScores(warped, truth), rank);
    for (auto &w : model.weights) {
      for (double &v : w.data) v *= 2.5;
    }
    for (double &u : model.u) u *= 2.5;
    EXPECT_EQ(RankMotivation(spec, model, x, truth).rank, rank);
  }
}

TEST(Rank, ClampingOnlyLowersTheTruthMaxMarginal) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const GraphSpec spec = testing::RandomGraph(rng, {5, 3, 4, 3}, 3, false);
    const Model model = testing::RandomModel(rng, spec, false);
    const auto x = testing::RandomFeatures(rng, 3, false);
    const Configuration truth =
        MakeConfig(static_cast<int>(rng() % 5), static_cast<int>(rng() % 3),
                   static_cast<int>(rng() % 4), static_cast<int>(rng() % 3));
    double previous = ScoreTable(spec, model, x).MaxMarginals(K::kMotivation)[truth.y[0]];
    Clamp clamp;
    for (int c : {1, 2, 3}) {
      clamp[c] = truth.y[c];
      const ScoreTable table(spec, model, x, clamp);
      const double now = table.MaxMarginals(K::kMotivation)[truth.y[0]];
      EXPECT_LE(now, previous);
      previous = now;
    }
    EXPECT_EQ(ScoreTable(spec, model, x, clamp).size(), 5u);
  }
}

TEST(NormalizedMedian, SmallCases) {
  EXPECT_EQ(NormalizedMedianRank(Records({{0, 1}, {1, 1}, {2, 1}})), 1.0);
  EXPECT_EQ(NormalizedMedianRank(Records({{0, 2}, {1, 10}})), 2.0);
  EXPECT_EQ(NormalizedMedianRank(Records({{0, 2}, {0, 4}, {1, 10}, {3, 5}})), 5.0);
  EXPECT_THROW(NormalizedMedianRank({}), Error);
}

TEST(NormalizedMedian, CategoriesWeighEqually) {
  // Many easy images of one category do not move the median.
  std::vector<std::pair<int, int>> base = {{0, 1}, {1, 6}, {2, 8}};
  const double before = NormalizedMedianRank(Records(base));
  for (int i = 0; i < 50; ++i) base.push_back({0, 1});
  EXPECT_EQ(NormalizedMedianRank(Records(base)), before);
}

TEST(NormalizedMedian, InvariantToDuplicatingOneCategory) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<RankRecord> rs;
    for (int i = 0; i < 40; ++i) {
      rs.push_back({"x", static_cast<int>(rng() % 7), 1 + static_cast<int>(rng() % 7)});
    }
    const double before = NormalizedMedianRank(rs);
    const int cat = rs[0].truth;
    const auto copy = rs;
    for (const auto &r : copy) {
      if (r.truth == cat) rs.push_back(r);
    }
    EXPECT_EQ(NormalizedMedianRank(rs), before);
  }
}

TEST(Accuracy, Curves) {
  EXPECT_EQ(AccuracyCurve(Records({{0, 1}, {1, 1}}), 3), (std::vector<double>{1.0, 1.0, 1.0}));
  EXPECT_EQ(AccuracyCurve(Records({{0, 1}, {1, 3}}), 3), (std::vector<double>{0.5, 0.5, 1.0}));
  EXPECT_THROW(AccuracyCurve(Records({{0, 4}}), 3), Error);
  std::mt19937_64 rng(5);
  std::vector<RankRecord> rs;
  for (int i = 0; i < 333; ++i) rs.push_back({"x", 0, 1 + static_cast<int>(rng() % 11)});
  const auto curve = AccuracyCurve(rs, 11);
  for (size_t k = 1; k < curve.size(); ++k) EXPECT_GE(curve[k], curve[k - 1]);
  EXPECT_EQ(curve.back(), 1.0);
}

TEST(Chance, UniformScoresGiveMiddleRank) {
  constexpr int kClasses = 79;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<RankRecord> rs;
  for (int i = 0; i < 4000; ++i) {
    std::vector<double> scores(kClasses);
    for (double &s : scores) s = u(rng);
    const int truth = static_cast<int>(rng() % kClasses);
    rs.push_back({"x", truth, RankFromScores(scores, truth)});
  }
  EXPECT_NEAR(NormalizedMedianRank(rs), 40.0, 2.0);
  const auto curve = AccuracyCurve(rs, kClasses);
  for (int k = 1; k <= kClasses; ++k) EXPECT_NEAR(curve[k - 1], k / 79.0, 0.03);
}

TEST(Modes, TagsAndParsing) {
  EXPECT_EQ(EvalMode().Tag(), "Fully Automatic");
  EXPECT_EQ(EvalMode::Parse("automatic").kind, EvalMode::Kind::kAutomatic);
  EXPECT_EQ(EvalMode::Parse("no-trinary").Tag(), "no-trinary");
  EXPECT_EQ(EvalMode::Parse("clamp:a+o+s").Tag(), "Action+Object+Scene");
  EXPECT_EQ(EvalMode::Parse("clamp:scene+action").Tag(), "Action+Scene");
  EXPECT_EQ(EvalMode::Parse("clamp:o").Tag(), "Object");
  for (const char *bad : {"clamp:", "clamp:m", "clamp:a+m", "bogus", "Automatic"}) {
    EXPECT_THROW(EvalMode::Parse(bad), Error) << bad;
  }
}

// Vision pins (a, o, s) and a dominant trinary maps (a, o) to the truth, so
// every image ranks its motivation first.
TEST(Protocol, ExactLanguageGivesRankOne) {
  const std::array<int, kNumConcepts> dims = {5, 3, 4, 2};
  auto motive = [](int a, int o) { return (2 * a + o) % 5; };
  std::vector<PotentialTensor> tensors;
  for (const Relation &r : DefaultFactorList()) {
    PotentialTensor t;
    t.relation = r;
    size_t cells = 1;
    for (ConceptKind k : r.kinds()) {
      t.dims.push_back(dims[Index(k)]);
      cells *= static_cast<size_t>(dims[Index(k)]);
    }
    t.values.assign(cells, 0.0);
    if (r == Relation{K::kAction, K::kObject, K::kMotivation}) {
      for (int m = 0; m < 5; ++m) {
        for (int a = 0; a < 3; ++a) {
          for (int o = 0; o < 4; ++o) {
            const std::vector<int> idx = {m, a, o};
            t.values[t.Offset(idx)] = motive(a, o) == m ? 1.0 : 0.0;
          }
        }
      }
    }
    tensors.push_back(t);
  }
  const int width = 3 + 4 + 2;
  const GraphSpec spec(dims, tensors, width);
  Model model = Model::Zero(dims, width);
  int base = 0;
  for (int c = 1; c < kNumConcepts; ++c) {
    for (int v = 0; v < dims[c]; ++v) model.weights[c](v, base + v) = 10.0;
    base += dims[c];
  }
  model.u[FactorIndex(Relation{K::kAction, K::kObject, K::kMotivation})] = 5.0;
  std::vector<Example> test;
  for (int a = 0; a < 3; ++a) {
    for (int o = 0; o < 4; ++o) {
      for (int s = 0; s < 2; ++s) {
        Example ex;
        ex.image_id = std::to_string(test.size());
        ex.truth = MakeConfig(motive(a, o), a, o, s);
        ex.features.assign(width, 0.0);
        ex.features[a] = ex.features[3 + o] = ex.features[7 + s] = 1.0;
        test.push_back(ex);
      }
    }
  }
  const EvalReport r = RunProtocol(spec, model, test, {});
  EXPECT_EQ(r.normalized_median_rank, 1.0);
  EXPECT_EQ(r.mean_rank, 1.0);
  EXPECT_EQ(r.mode_tag, "Fully Automatic");
  EXPECT_EQ(r.accuracy.front(), 1.0);
  // Without the trinary the motivation is a blind guess.
  const EvalReport ablated = RunProtocol(spec, model, test, EvalMode::Parse("no-trinary"));
  EXPECT_EQ(ablated.mode_tag, "no-trinary");
  EXPECT_GT(ablated.mean_rank, 1.0);
}

struct SyntheticSetup {
  GraphSpec spec;
  std::vector<Example> train, test;
};

SyntheticSetup Synthetic() {
  const auto world = testing::MakeWorld({});
  SyntheticSetup s{testing::WorldGraph(world), {}, {}};
  std::mt19937_64 rng(9);
  s.train = testing::SampleExamples(world, 80, rng, "tr");
  s.test = testing::SampleExamples(world, 60, rng, "te");
  return s;
}

TEST(Protocol, ThreadsAndErrors) {
  const SyntheticSetup s = Synthetic();
  const Model model = TrainSsvm(s.spec, s.train, TrainOptions()).model;
  const EvalReport one = RunProtocol(s.spec, model, s.test, EvalMode::Parse("clamp:a"), 1);
  const EvalReport four = RunProtocol(s.spec, model, s.test, EvalMode::Parse("clamp:a"), 4);
  ASSERT_EQ(one.records.size(), four.records.size());
  for (size_t i = 0; i < one.records.size(); ++i) {
    EXPECT_EQ(one.records[i].rank, four.records[i].rank);
    EXPECT_EQ(one.records[i].image_id, s.test[i].image_id);
  }
  EXPECT_EQ(one.mode_tag, "Action");
  try {
    RunProtocol(s.spec, model, {}, {});
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kDataEmpty);
  }
}

TEST(Protocol, BaselineNeedsMatchingOracle) {
  const SyntheticSetup s = Synthetic();
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (const auto &ex : s.train) {
    x.push_back(AugmentWithOracle(ex.features, ex.truth, 0b0010, s.spec.dims()));
    y.push_back(ex.truth.y[0]);
  }
  MulticlassModel m = TrainMulticlass(x, y, s.spec.dims()[0], MulticlassOptions());
  m.oracle_mask = 0b0010;
  m.oracle_dims = s.spec.dims();
  const EvalReport r = RunBaselineProtocol(m, s.spec.dims(), s.test, EvalMode::Parse("clamp:a"));
  EXPECT_EQ(r.method, "one-vs-rest");
  EXPECT_EQ(r.mode_tag, "Action");
  EXPECT_THROW(RunBaselineProtocol(m, s.spec.dims(), s.test, {}), Error);
  EXPECT_THROW(RunBaselineProtocol(m, s.spec.dims(), s.test, EvalMode::Parse("clamp:a+o")), Error);
  EXPECT_THROW(RunBaselineProtocol(m, s.spec.dims(), s.test, EvalMode::Parse("no-trinary")), Error);
}

TEST(Reports, Writers) {
  const EvalReport r =
      MakeReport("full", "Action+Object+Scene", 3, Records({{0, 1}, {1, 3}, {1, 2}, {2, 1}}));
  std::ostringstream js;
  WriteReportJson(js, r);
  const auto j = nlohmann::json::parse(js.str());
  EXPECT_EQ(j["version"], "why-report/1");
  EXPECT_EQ(j["mode"], "Action+Object+Scene");
  EXPECT_EQ(j["normalized_median_rank"], 1.0);
  EXPECT_EQ(j["rank_normalization"], r.rank_normalization);
  EXPECT_EQ(j["accuracy_at_k"].size(), 3u);
  EXPECT_EQ(j["records"].size(), 4u);

  std::ostringstream csv;
  WriteAccuracyCsv(csv, r);
  const std::string rows = csv.str();
  EXPECT_EQ(rows.substr(0, 11), "K,accuracy\n");
  EXPECT_EQ(std::count(rows.begin(), rows.end(), '\n'), 4);

  const Vocabulary names(K::kMotivation, {"rest", "play", "eat"});
  std::ostringstream text;
  WriteReportText(text, r, &names);
  EXPECT_NE(text.str().find("normalized median rank: 1.00"), std::string::npos) << text.str();
  EXPECT_NE(text.str().find("play"), std::string::npos);
  EXPECT_NE(text.str().find("Action+Object+Scene"), std::string::npos);
}

}  // namespace
}  // namespace whyact
