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

#include "whyact/cli.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "support/synthetic.h"
#include "support/temp_dir.h"
#include "whyact/dataset.h"

namespace whyact {
namespace {

using testing::ReadAll;
using testing::TempDir;
using testing::WriteText;

struct CliRun {
  int code;
  std::string out, err;
};

CliRun Cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = RunCli(args, out, err);
  return {code, out.str(), err.str()};
}

// A unigram model over the digits that make up the generated terms, so
// every tensor varies; other words fall back to <unk>.
std::string ToyArpa() {
  std::ostringstream a;
  a << "\\data\\\nngram 1=14\n\n\\1-grams:\n";
  a << "-99\t<s>\n-1.0\t</s>\n-3.0\t<unk>\n-1.5\tmotivation\n";
  for (int d = 0; d < 10; ++d) a << -(1.0 + 0.37 * ((d * 7) % 10)) << "\t" << d << "\n";
  a << "\n\\end\\\n";
  return a.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    testing::WorldOptions o;
    o.dims = {6, 3, 4, 3};
    o.feature_dim = 8;
    world_ = testing::MakeWorld(o);
    const VocabularySet vocabs = testing::WorldVocabularies(world_);
    const char *names[] = {"motivations", "actions", "objects", "scenes"};
    for (int c = 0; c < kNumConcepts; ++c) {
      std::ofstream out(dir_ / (std::string(names[c]) + ".txt"));
      vocabs[c]->Write(out);
      vocab_args_.push_back(std::string("--") + names[c]);
      vocab_args_.push_back(dir_ / (std::string(names[c]) + ".txt"));
    }
    WriteText(dir_ / "lm.arpa", ToyArpa());
    std::mt19937_64 rng(4);
    const auto examples = testing::SampleExamples(world_, 60, rng, "img");
    {
      std::ofstream out(dir_ / "ann.jsonl");
      WriteAnnotations(out, ToAnnotations(examples, vocabs));
    }
    WriteFeatureMatrixFile(dir_ / "feat.bin", ToFeatureMatrix(examples));
  }

  std::vector<std::string> With(std::vector<std::string> args, bool vocabs = true) const {
    if (vocabs) args.insert(args.end(), vocab_args_.begin(), vocab_args_.end());
    return args;
  }

  std::string P(const std::string &name) const { return dir_ / name; }

  void BuildPotentials() {
    const CliRun r = Cli(With({"build-potentials", "--lm", P("lm.arpa"), "--templates",
                               std::string(WHYACT_DATA_DIR) + "/default_templates.txt", "--out",
                               P("pot.bin"), "--threads", "2"}));
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("wrote 13 tensors"), std::string::npos) << r.out;
  }

  void MakeSplit() {
    const CliRun r =
        Cli({"split", "--annotations", P("ann.jsonl"), "--out", P("split.json"), "--seed", "3"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, "train 30 test 30\n");
  }

  std::vector<std::string> Data() const {
    return {"--annotations", P("ann.jsonl"), "--features",
            P("feat.bin"),   "--split",      P("split.json")};
  }

  std::vector<std::string> Train(const std::string &out, const std::string &threads) const {
    auto args = With({"train", "--potentials", P("pot.bin"), "--C", "1", "--max-passes", "4",
                      "--out", out, "--threads", threads});
    for (const auto &d : Data()) args.push_back(d);
    return args;
  }

  testing::World world_;
  TempDir dir_;
  std::vector<std::string> vocab_args_;
};

TEST_F(CliTest, EndToEnd) {
  BuildPotentials();
  MakeSplit();

  CliRun r = Cli({"pca-fit", "--features", P("feat.bin"), "--split", P("split.json"), "--dim", "5",
                  "--out", P("pca.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "fitted 5 components on 30 rows of dimension 8\n");
  r = Cli(
      {"pca-apply", "--pca", P("pca.json"), "--features", P("feat.bin"), "--out", P("feat5.bin")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(ReadFeatureMatrixFile(P("feat5.bin")).values.cols, 5);

  auto train = Train(P("model.json"), "1");
  train.push_back("--pca");
  train.push_back(P("pca.json"));
  r = Cli(train);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("pass 1 added"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("wrote model"), std::string::npos);

  auto eval = With({"eval", "--model", P("model.json"), "--potentials", P("pot.bin"), "--mode",
                    "clamp:a+o+s", "--report", P("rep")});
  for (const auto &d : Data()) eval.push_back(d);
  r = Cli(eval);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("mode: Action+Object+Scene"), std::string::npos) << r.out;
  const auto report = nlohmann::json::parse(ReadAll(P("rep.json")));
  EXPECT_EQ(report["mode"], "Action+Object+Scene");
  EXPECT_EQ(report["num_images"], 30);
  EXPECT_EQ(report["accuracy_at_k"].size(), 6u);
  EXPECT_EQ(ReadAll(P("rep.txt")), r.out);
  EXPECT_EQ(ReadAll(P("rep.csv")).rfind("K,accuracy\n", 0), 0u);

  r = Cli(With({"infer", "--model", P("model.json"), "--potentials", P("pot.bin"), "--features",
                P("feat.bin"), "--top-k", "3", "img0", "img1"}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 8) << r.out;
  EXPECT_EQ(r.out.rfind("img0\n  1  ", 0), 0u) << r.out;

  auto base = With({"train-baseline", "--C", "1", "--oracle", "a+o+s", "--out", P("base.json")});
  for (const auto &d : Data()) base.push_back(d);
  r = Cli(base);
  ASSERT_EQ(r.code, 0) << r.err;
  auto beval = With({"eval", "--baseline", P("base.json"), "--mode", "clamp:a+o+s"});
  for (const auto &d : Data()) beval.push_back(d);
  r = Cli(beval);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("method: one-vs-rest"), std::string::npos) << r.out;
  beval[4] = "automatic";
  r = Cli(beval);
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.err.rfind("error: INVALID_ARGUMENT: ", 0), 0u) << r.err;
}

TEST_F(CliTest, OutputsAreReproducible) {
  BuildPotentials();
  const std::string pot = ReadAll(P("pot.bin"));
  BuildPotentials();
  EXPECT_EQ(ReadAll(P("pot.bin")), pot);
  MakeSplit();
  const std::string split = ReadAll(P("split.json"));
  MakeSplit();
  EXPECT_EQ(ReadAll(P("split.json")), split);
  ASSERT_EQ(Cli(Train(P("a.json"), "1")).code, 0);
  ASSERT_EQ(Cli(Train(P("b.json"), "3")).code, 0);
  EXPECT_EQ(ReadAll(P("a.json")), ReadAll(P("b.json")));
}

TEST_F(CliTest, CrossValidationLogsEveryFold) {
  BuildPotentials();
  MakeSplit();
  auto args = With({"train", "--potentials", P("pot.bin"), "--C", "0", "--c-grid", "0.1,1",
                    "--folds", "3", "--max-passes", "2", "--out", P("cv.json")});
  for (const auto &d : Data()) args.push_back(d);
  const CliRun r = Cli(args);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("cv C=0.1 fold 3/3"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("cv C=1 mean"), std::string::npos);
  EXPECT_NE(r.out.find("selected C="), std::string::npos);
}

TEST_F(CliTest, ConfigFileFillsUnsetOptions) {
  BuildPotentials();
  MakeSplit();
  WriteText(P("train.cfg"), "# defaults\nmax-passes = 1\nC = 1\n");
  auto args = With({"train", "--potentials", P("pot.bin"), "--config", P("train.cfg"), "--C", "2",
                    "--out", P("m.json")});
  for (const auto &d : Data()) args.push_back(d);
  CliRun r = Cli(args);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.find("pass 2 "), std::string::npos) << r.out;
  EXPECT_NE(ReadAll(P("m.json")).find("\"C\": 2.0"), std::string::npos);

  WriteText(P("bad.cfg"), "max_passes = 1\n");
  args[4] = P("bad.cfg");
  r = Cli(args);
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("unknown key 'max_passes'"), std::string::npos) << r.err;
}

TEST_F(CliTest, EmptyTrainingSetIsDataEmpty) {
  BuildPotentials();
  Split s;
  s.seed = 1;
  s.test = {"img0", "img1"};
  WriteSplitFile(P("split.json"), s);
  const CliRun r = Cli(Train(P("m.json"), "1"));
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.err.rfind("error: DATA_EMPTY: ", 0), 0u) << r.err;
}

TEST_F(CliTest, ErrorsAreCategorized) {
  CliRun r = Cli({"split", "--annotations", P("missing.jsonl"), "--out", P("s.json")});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.err.rfind("error: IO_ERROR: ", 0), 0u) << r.err;
  r = Cli({"split", "--annotations", P("ann.jsonl")});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.err.rfind("error: INVALID_ARGUMENT: ", 0), 0u) << r.err;
  r = Cli({"frobnicate"});
  EXPECT_NE(r.code, 0);
  WriteText(P("bad.tpl"), "motivation: wants to MOTIVATION\n");
  r = Cli(With({"build-potentials", "--lm", P("lm.arpa"), "--templates", P("bad.tpl"), "--out",
                P("pot.bin")}));
  EXPECT_EQ(r.err.rfind("error: MISSING_TEMPLATE: ", 0), 0u) << r.err;
  WriteText(P("bad.arpa"), "\\data\\\nngram 1=2\n\n\\1-grams:\n-1\ta\n\\end\\\n");
  r = Cli(With({"build-potentials", "--lm", P("bad.arpa"), "--templates",
                std::string(WHYACT_DATA_DIR) + "/default_templates.txt", "--out", P("pot.bin")}));
  EXPECT_EQ(r.err.rfind("error: PARSE_ERROR: ", 0), 0u) << r.err;
}

TEST_F(CliTest, HelpShowsDefaults) {
  const CliRun top = Cli({"--help"});
  EXPECT_EQ(top.code, 0);
  for (const char *sub : {"build-potentials", "pca-fit", "pca-apply", "split", "train",
                          "train-baseline", "infer", "eval"}) {
    EXPECT_NE(top.out.find(sub), std::string::npos) << sub;
    const CliRun r = Cli({sub, "--help"});
    EXPECT_EQ(r.code, 0) << sub;
    EXPECT_NE(r.out.find("--threads"), std::string::npos) << sub;
    EXPECT_NE(r.out.find("[1]"), std::string::npos) << sub << "\n" << r.out;
  }
  const CliRun train = Cli({"train", "--help"});
  for (const char *want : {"[50]", "[10]", "[0.001]", "[0.01,0.1,1,10,100]", "[5]"}) {
    EXPECT_NE(train.out.find(want), std::string::npos) << want << "\n" << train.out;
  }
  const CliRun build = Cli({"build-potentials", "--help"});
  EXPECT_NE(build.out.find("[he,she]"), std::string::npos) << build.out;
  EXPECT_NE(build.out.find("[-7]"), std::string::npos) << build.out;
}

}  // namespace
}  // namespace whyact
