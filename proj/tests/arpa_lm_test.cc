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

#include "whyact/arpa_lm.h"

#include <gtest/gtest.h>

#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "whyact/error.h"

namespace whyact {
namespace {

const std::string kDir = WHYACT_TESTDATA_DIR;

struct Query {
  std::vector<std::string> context;
  std::string word;
  double expected;
};

// Frozen from tests/oracles/arpa_backoff_oracle.py on toy3.arpa.
const std::vector<Query> &ToyQueries() {
  static const std::vector<Query> q = {
      {{}, "the", -1.2},
      {{}, "exercise", -2.5},
      {{"walking"}, "the", -0.7},
      {{"walking", "the"}, "dog", -0.4},
      {{"the"}, "dog", -0.9},
      {{"in", "order"}, "to", -0.1},
      {{"order", "to"}, "exercise", -0.6},
      {{"walking"}, "dog", -2.1},
      {{"the"}, "walking", -2.4},
      {{"dog"}, "order", -1.9},
      {{"walking", "the"}, "in", -2.5},
      {{"the", "dog"}, "in", -1.3},
      {{"in", "order"}, "exercise", -3.25},
      {{"he", "wants"}, "exercise", -3.65},
      {{"<s>", "he"}, "wants", -0.5},
      {{"<s>", "she"}, "wants", -2.8},
      {{"she", "wants"}, "to", -0.5},
      {{"wants", "to"}, "exercise", -1.55},
      {{"because", "he"}, "wants", -0.6},
      {{"a", "dog"}, "in", -1.1},
  };
  return q;
}

std::vector<std::string> Words(const std::string &s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

NGramModel Toy() { return NGramModel::LoadArpaFile(kDir + "/toy3.arpa"); }

NGramModel FromText(const std::string &text) {
  std::istringstream in(text);
  return NGramModel::LoadArpa(in);
}

ErrorCode ParseCode(const std::string &text) {
  try {
    FromText(text);
  } catch (const Error &e) {
    return e.code();
  }
  ADD_FAILURE() << "no error for:\n" << text;
  return ErrorCode::kInvalidArgument;
}

TEST(ArpaLoad, HeaderCounts) {
  const NGramModel lm = Toy();
  EXPECT_EQ(lm.order(), 3);
  EXPECT_EQ(lm.num_entries(1), 14u);
  EXPECT_EQ(lm.num_entries(2), 9u);
  EXPECT_EQ(lm.num_entries(3), 5u);
  EXPECT_FALSE(lm.has_unk());
}

TEST(ArpaLoad, FindStoredEntries) {
  const NGramModel lm = Toy();
  const auto e = lm.Find(Words("in order"));
  ASSERT_TRUE(e.has_value());
  EXPECT_DOUBLE_EQ(e->log10_prob, -0.3);
  EXPECT_DOUBLE_EQ(e->backoff, -0.5);
  EXPECT_TRUE(e->has_backoff);
  const auto top = lm.Find(Words("in order to"));
  ASSERT_TRUE(top.has_value());
  EXPECT_FALSE(top->has_backoff);
  EXPECT_FALSE(lm.Find(Words("order in")).has_value());
  EXPECT_FALSE(lm.Find(Words("zebra")).has_value());
}

TEST(ArpaBackoff, MatchesReferenceRecursion) {
  const NGramModel lm = Toy();
  for (const Query &q : ToyQueries()) {
    EXPECT_NEAR(lm.LogProbWord(q.context, q.word), q.expected, 1e-6)
        << q.word << " after " << q.context.size() << " words";
  }
}

TEST(ArpaBackoff, LongContextIsTruncated) {
  const NGramModel lm = Toy();
  EXPECT_DOUBLE_EQ(lm.LogProbWord(Words("a b c walking the"), "dog"),
                   lm.LogProbWord(Words("walking the"), "dog"));
}

TEST(ArpaBackoff, OovWordGetsFloor) {
  NGramModel lm = Toy();
  EXPECT_DOUBLE_EQ(lm.LogProbWord(Words("the"), "zebra"), NGramModel::kDefaultOovFloor);
  lm.set_oov_floor(-12.5);
  EXPECT_DOUBLE_EQ(lm.LogProbWord({}, "zebra"), -12.5);
}

TEST(ArpaBackoff, OovContextBacksOffPastIt) {
  const NGramModel lm = Toy();
  EXPECT_NEAR(lm.LogProbWord(Words("zebra the"), "dog"), -0.9, 1e-12);
}

TEST(ArpaBackoff, UnkAbsorbsOovTokens) {
  const NGramModel lm = NGramModel::LoadArpaFile(kDir + "/five_entries.arpa");
  EXPECT_TRUE(lm.has_unk());
  EXPECT_NEAR(lm.LogProbWord({}, "dog"), -0.9, 1e-12);
  EXPECT_NEAR(lm.LogProbWord(Words("cat"), "dog"), -0.7, 1e-12);
  EXPECT_NEAR(lm.LogProbWord(Words("the"), "zebra"), -1.0, 1e-12);
}

TEST(ArpaSequence, FrozenTotals) {
  const NGramModel lm = Toy();
  const auto s = lm.ScoreSequence(Words("walking the dog in order to exercise"), false);
  EXPECT_NEAR(s.total, -5.5, 1e-9);
  EXPECT_EQ(s.scored_tokens, 7);
  EXPECT_NEAR(s.per_token, -5.5 / 7, 1e-9);
  EXPECT_NEAR(lm.ScoreSequence(Words("walking the dog because he wants to exercise"), false).total,
              -10.5, 1e-9);
  EXPECT_NEAR(lm.ScoreSequence(Words("walking the dog because she wants to exercise"), false).total,
              -12.95, 1e-9);
  const auto b = lm.ScoreSequence(Words("he wants to"), true);
  EXPECT_NEAR(b.total, -3.25, 1e-9);
  EXPECT_EQ(b.scored_tokens, 4);
}

TEST(ArpaSequence, EmptySequence) {
  const auto s = Toy().ScoreSequence({}, false);
  EXPECT_EQ(s.scored_tokens, 0);
  EXPECT_EQ(s.total, 0.0);
  EXPECT_EQ(s.per_token, 0.0);
}

// The sequence total is the exact sum of the word terms it is built from.
TEST(ArpaSequence, AdditivityOnRandomSequences) {
  const NGramModel lm = Toy();
  const std::vector<std::string> pool =
      Words("<s> </s> the dog walking in order to exercise he she wants because a zebra");
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 500; ++trial) {
    const int len = std::uniform_int_distribution<int>(1, 9)(rng);
    std::vector<std::string> seq;
    for (int i = 0; i < len; ++i) {
      seq.push_back(pool[std::uniform_int_distribution<size_t>(0, pool.size() - 1)(rng)]);
    }
    for (bool boundary : {false, true}) {
      std::vector<std::string> full = seq;
      if (boundary) {
        full.insert(full.begin(), "<s>");
        full.push_back("</s>");
      }
      double sum = 0.0;
      for (size_t i = boundary ? 1 : 0; i < full.size(); ++i) {
        const size_t start = i >= 2 ? i - 2 : 0;
        sum += lm.LogProbWord(std::span(full.data() + start, i - start), full[i]);
      }
      EXPECT_EQ(lm.ScoreSequence(seq, boundary).total, sum);
    }
  }
}

TEST(ArpaLoad, FiveEntryTranscription) {
  const NGramModel lm = NGramModel::LoadArpaFile(kDir + "/five_entries.arpa");
  struct Row {
    std::string ngram;
    double prob;
    bool has_backoff;
    double backoff;
  };
  const std::vector<Row> rows = {{"the", -0.3, true, -0.1},
                                 {"cat", -1.2, true, -0.2},
                                 {"<unk>", -0.9, false, 0.0},
                                 {"the cat", -0.5, false, 0.0},
                                 {"cat <unk>", -0.7, false, 0.0}};
  EXPECT_EQ(lm.order(), 2);
  EXPECT_EQ(lm.vocab_size(), 3u);
  for (const Row &r : rows) {
    const auto e = lm.Find(Words(r.ngram));
    ASSERT_TRUE(e.has_value()) << r.ngram;
    EXPECT_EQ(e->log10_prob, r.prob) << r.ngram;
    EXPECT_EQ(e->has_backoff, r.has_backoff) << r.ngram;
    EXPECT_EQ(e->backoff, r.backoff) << r.ngram;
  }
}

TEST(ArpaBackoff, SingleStep) { EXPECT_NEAR(Toy().LogProbWord(Words("the"), "the"), -1.6, 1e-12); }

TEST(ArpaSequence, SmallCases) {
  const NGramModel lm = Toy();
  const auto one = lm.ScoreSequence(Words("dog"), false);
  EXPECT_DOUBLE_EQ(one.total, -1.5);
  EXPECT_DOUBLE_EQ(one.per_token, -1.5);
  EXPECT_NEAR(lm.ScoreSequence(Words("the dog"), false).total, -1.2 + -0.9, 1e-12);
  EXPECT_DOUBLE_EQ(lm.ScoreSequence(Words("zebra"), false).total, -7.0);
}

TEST(ArpaSequence, Deterministic) {
  const NGramModel lm = Toy();
  const auto seq = Words("walking the dog because she wants to exercise");
  const double first = lm.ScoreSequence(seq, true).total;
  for (int i = 0; i < 10; ++i) EXPECT_EQ(lm.ScoreSequence(seq, true).total, first);
}

// Map-based model with the textbook recursion, independent of the trie.
struct ReferenceLm {
  std::map<std::vector<std::string>, std::pair<double, double>> entries;  // prob, backoff

  double LogProb(std::vector<std::string> ctx, const std::string &w) const {
    if (!entries.count({w})) return NGramModel::kDefaultOovFloor;
    std::vector<std::string> key = ctx;
    key.push_back(w);
    if (const auto it = entries.find(key); it != entries.end()) return it->second.first;
    double bow = 0.0;
    if (const auto it = entries.find(ctx); it != entries.end()) bow = it->second.second;
    ctx.erase(ctx.begin());
    return bow + LogProb(ctx, w);
  }

  std::string Arpa() const {
    std::map<size_t, std::vector<std::string>> lines;
    for (const auto &[k, v] : entries) {
      std::ostringstream l;
      l.precision(17);
      l << v.first;
      for (const auto &t : k) l << ' ' << t;
      if (k.size() < 3) l << ' ' << v.second;
      lines[k.size()].push_back(l.str());
    }
    std::ostringstream out;
    out << "\\data\\\n";
    for (const auto &[n, ls] : lines) out << "ngram " << n << '=' << ls.size() << '\n';
    for (const auto &[n, ls] : lines) {
      out << "\n\\" << n << "-grams:\n";
      for (const auto &l : ls) out << l << '\n';
    }
    out << "\n\\end\\\n";
    return out.str();
  }
};

ReferenceLm RandomReference(std::mt19937_64 &rng) {
  const std::vector<std::string> words = Words("a b c d e f");
  std::uniform_real_distribution<double> lp(-3.0, -0.1), bo(-1.0, 0.0);
  std::bernoulli_distribution keep(0.35);
  ReferenceLm ref;
  for (const auto &w : words) ref.entries[{w}] = {lp(rng), bo(rng)};
  for (const auto &u : words) {
    for (const auto &v : words) {
      if (!keep(rng)) continue;
      ref.entries[{u, v}] = {lp(rng), bo(rng)};
      for (const auto &w : words) {
        if (keep(rng)) ref.entries[{u, v, w}] = {lp(rng), 0.0};
      }
    }
  }
  return ref;
}

TEST(ArpaProperty, StoredEntriesScoreThemselves) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const ReferenceLm ref = RandomReference(rng);
    const NGramModel lm = FromText(ref.Arpa());
    for (const auto &[k, v] : ref.entries) {
      const std::vector<std::string> ctx(k.begin(), k.end() - 1);
      EXPECT_EQ(lm.LogProbWord(ctx, k.back()), v.first);
    }
  }
}

// Dropping a top-order entry turns its query into backoff(context) plus the
// shortened query, in both implementations.
TEST(ArpaProperty, BackoffConsistencyAfterRemoval) {
  std::mt19937_64 rng(6);
  const std::vector<std::string> words = Words("a b c d e f g");
  for (int trial = 0; trial < 20; ++trial) {
    ReferenceLm ref = RandomReference(rng);
    std::vector<std::vector<std::string>> trigrams;
    for (const auto &[k, v] : ref.entries) {
      if (k.size() == 3) trigrams.push_back(k);
    }
    if (trigrams.empty()) continue;
    const auto victim =
        trigrams[std::uniform_int_distribution<size_t>(0, trigrams.size() - 1)(rng)];
    ref.entries.erase(victim);
    const NGramModel lm = FromText(ref.Arpa());
    const std::vector<std::string> ctx(victim.begin(), victim.end() - 1);
    const std::vector<std::string> shorter(victim.begin() + 1, victim.end() - 1);
    EXPECT_NEAR(lm.LogProbWord(ctx, victim.back()),
                ref.entries.at(ctx).second + lm.LogProbWord(shorter, victim.back()), 1e-12);
    for (const auto &u : words) {
      for (const auto &v : words) {
        for (const auto &w : words) {
          EXPECT_NEAR(lm.LogProbWord(Words(u + " " + v), w), ref.LogProb({u, v}, w), 1e-12);
        }
      }
    }
  }
}

TEST(ArpaParse, Errors) {
  EXPECT_EQ(ParseCode("nothing here\n"), ErrorCode::kParseError);
  EXPECT_EQ(ParseCode("\\data\\\nngram 1=2\n\n\\1-grams:\n-1 a\n\\end\\\n"),
            ErrorCode::kParseError);
  EXPECT_EQ(ParseCode("\\data\\\nngram 1=1\n\n\\1-grams:\n-1 a\n"), ErrorCode::kParseError);
  EXPECT_EQ(ParseCode("\\data\\\nngram 1=1\n\n\\1-grams:\nx a\n\\end\\\n"), ErrorCode::kParseError);
  EXPECT_EQ(ParseCode("\\data\\\nngram 1=1\n\n\\1-grams:\n0.5 a\n\\end\\\n"),
            ErrorCode::kParseError);
  EXPECT_EQ(ParseCode("\\data\\\nngram 1=1\nngram 2=1\n\n\\1-grams:\n-1 a\n\n\\2-grams:\n"
                      "-1 a b\n\\end\\\n"),
            ErrorCode::kParseError);
  EXPECT_EQ(ParseCode("\\data\\\nngram 1=1\nngram 2=1\n\n\\1-grams:\n-1 a\n\n\\2-grams:\n"
                      "-1 a a -0.5\n\\end\\\n"),
            ErrorCode::kParseError);
  EXPECT_EQ(ParseCode("\\data\\\nngram 2=1\n\n\\end\\\n"), ErrorCode::kParseError);
}

TEST(ArpaParse, ErrorNamesLine) {
  try {
    FromText("\\data\\\nngram 1=1\n\n\\1-grams:\nbad a\n\\end\\\n");
    FAIL();
  } catch (const Error &e) {
    EXPECT_NE(std::string(e.what()).find("line 5"), std::string::npos) << e.what();
  }
}

TEST(ArpaParse, MissingFile) {
  try {
    NGramModel::LoadArpaFile(kDir + "/does_not_exist.arpa");
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kIoError);
  }
}

}  // namespace
}  // namespace whyact
