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

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "whyact/arpa_lm.h"
#include "whyact/container.h"
#include "whyact/dataset.h"
#include "whyact/error.h"
#include "whyact/evalx.h"
#include "whyact/graph.h"
#include "whyact/knowledge.h"
#include "whyact/learn.h"
#include "whyact/model_io.h"
#include "whyact/pca.h"

namespace whyact {

namespace {

std::string Format(const char *fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

std::vector<std::string> SplitList(const std::string &text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = NormalizeTerm(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> ParseGrid(const std::string &text) {
  std::vector<double> grid;
  for (const auto &item : SplitList(text)) {
    size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception &) {
      used = 0;
    }
    if (used != item.size() || !(v > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "bad C grid entry '" + item + "'");
    }
    grid.push_back(v);
  }
  if (grid.empty()) throw Error(ErrorCode::kInvalidArgument, "empty C grid");
  return grid;
}

void RequireFiles(std::initializer_list<const std::string *> paths) {
  for (const std::string *p : paths) {
    if (p->empty()) continue;
    if (!std::filesystem::is_regular_file(*p)) {
      throw Error(ErrorCode::kIoError, "no such file: " + *p);
    }
  }
}

// --- Shared option groups ------------------------------------------------------

struct VocabPaths {
  std::array<std::string, kNumConcepts> paths;

  void Add(CLI::App *app) {
    app->add_option("--motivations", paths[0], "Motivation vocabulary, one term per line")
        ->required();
    app->add_option("--actions", paths[1], "Action vocabulary")->required();
    app->add_option("--objects", paths[2], "Object vocabulary")->required();
    app->add_option("--scenes", paths[3], "Scene vocabulary")->required();
  }

  VocabularySet Load() const {
    VocabularySet v;
    for (ConceptKind k : kAllConcepts) {
      RequireFiles({&paths[Index(k)]});
      v[Index(k)] = Vocabulary::LoadFile(paths[Index(k)], k);
    }
    return v;
  }
};

std::array<int, kNumConcepts> DimsOf(const VocabularySet &v) {
  std::array<int, kNumConcepts> dims{};
  for (ConceptKind k : kAllConcepts) dims[Index(k)] = v[Index(k)]->size();
  return dims;
}

struct DataPaths {
  std::string annotations;
  std::string features;
  std::string split;

  void Add(CLI::App *app, const std::string &split_help) {
    app->add_option("--annotations", annotations, "Annotation file (JSON lines)")->required();
    app->add_option("--features", features, "Feature matrix file")->required();
    app->add_option("--split", split, split_help);
  }
};

std::vector<Example> ProjectAll(std::vector<Example> examples, const PcaProjection *pca) {
  if (!pca) return examples;
  for (auto &ex : examples) {
    ex.features = PcaApply(*pca, ex.features);
    ex.reduced = true;
  }
  return examples;
}

// Loads the annotated examples and keeps the requested split part.
std::vector<Example> LoadPart(const DataPaths &d, const VocabularySet &vocabs, bool train_part) {
  RequireFiles({&d.annotations, &d.features, &d.split});
  auto all = LoadDatasetFiles(d.annotations, d.features, vocabs, false);
  if (d.split.empty()) return all;
  const Split split = ReadSplitFile(d.split);
  return Select(all, train_part ? split.train : split.test);
}

void CheckHashes(const std::array<std::optional<uint64_t>, kNumConcepts> &stored,
                 const VocabularySet &vocabs, const std::string &what) {
  for (ConceptKind k : kAllConcepts) {
    if (stored[Index(k)] && *stored[Index(k)] != vocabs[Index(k)]->ContentHash()) {
      throw Error(ErrorCode::kVocabularyMismatch, what + " was trained with a different " +
                                                      std::string(ConceptName(k)) + " vocabulary");
    }
  }
}

GraphSpec LoadGraph(const std::string &potentials, const VocabularySet &vocabs, int feature_dim) {
  RequireFiles({&potentials});
  const VocabularyHashes expected = HashesOf(vocabs);
  return GraphSpec(DimsOf(vocabs), ReadContainerFile(potentials, &expected), feature_dim);
}

void CheckNonEmpty(const std::vector<Example> &examples, const char *what) {
  if (examples.empty()) throw Error(ErrorCode::kDataEmpty, std::string(what) + " is empty");
}

std::vector<Example> Pick(const std::vector<Example> &all, const std::vector<size_t> &idx) {
  std::vector<Example> out;
  out.reserve(idx.size());
  for (size_t i : idx) out.push_back(all[i]);
  return out;
}

void LogCv(std::ostream &out, const CvResult &cv) {
  for (size_t g = 0; g < cv.grid.size(); ++g) {
    for (size_t f = 0; f < cv.fold_scores[g].size(); ++f) {
      out << "cv C=" << cv.grid[g] << " fold " << f + 1 << "/" << cv.fold_scores[g].size()
          << " normalized median rank " << Format("%.4f", cv.fold_scores[g][f]) << "\n";
    }
    out << "cv C=" << cv.grid[g] << " mean " << Format("%.4f", cv.mean_scores[g]) << "\n";
  }
  out << "selected C=" << cv.best_C << "\n";
}

std::string ConfigText(const Configuration &y, const VocabularySet &vocabs) {
  std::string out;
  for (ConceptKind k : kAllConcepts) {
    if (!out.empty()) out += "  ";
    out += std::string(ConceptName(k)) + "=" + vocabs[Index(k)]->term(y[k]);
  }
  return out;
}

// --- Commands -----------------------------------------------------------------

struct Common {
  std::string config;
  uint64_t seed = 1;
  int threads = 1;

  void Add(CLI::App *app, bool seeded) {
    app->add_option("--config", config, "Flat key=value file of option defaults");
    if (seeded) app->add_option("--seed", seed, "Seed for all randomness");
    app->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1, 1024));
  }
};

struct BuildPotentialsCmd {
  Common common;
  VocabPaths vocabs;
  std::string lm, templates, out;
  double oov_floor = NGramModel::kDefaultOovFloor;
  bool boundary = false;
  std::string pronouns = "he,she";
  bool no_standardize = false;

  void Add(CLI::App *app) {
    common.Add(app, false);
    vocabs.Add(app);
    app->add_option("--lm", lm, "ARPA language model")->required();
    app->add_option("--templates", templates, "Template file")->required();
    app->add_option("--out", out, "Output tensor container")->required();
    app->add_option("--oov-floor", oov_floor, "log10 score for unknown tokens without <unk>");
    app->add_flag("--boundary", boundary,
                  "Score with <s> and </s> sentence boundaries (default: off)");
    app->add_option("--pronouns", pronouns, "Comma-separated PRONOUN expansions");
    app->add_flag("--no-standardize", no_standardize, "Keep raw tensor values (default: off)");
  }

  void Run(std::ostream &os) {
    RequireFiles({&lm, &templates});
    const VocabularySet v = vocabs.Load();
    NGramModel model = NGramModel::LoadArpaFile(lm);
    model.set_oov_floor(oov_floor);
    const auto sets = LoadTemplatesFile(templates);
    BuildOptions options;
    options.boundary = boundary;
    options.pronouns = SplitList(pronouns);
    options.threads = common.threads;
    std::vector<PotentialTensor> tensors;
    for (const Relation &r : DefaultFactorList()) {
      const auto it = std::find_if(sets.begin(), sets.end(),
                                   [&](const TemplateSet &s) { return s.relation == r; });
      if (it == sets.end()) {
        throw Error(ErrorCode::kMissingTemplate,
                    templates + ": no template for relation " + r.Name());
      }
      PotentialTensor t = BuildTensor(model, v, *it, options);
      const TensorMoments m = Moments(t.values);
      os << r.Name() << " dims";
      for (int d : t.dims) os << " " << d;
      os << " mean " << Format("%.6f", m.mean) << " std " << Format("%.6f", m.stddev) << " queries "
         << CountQueries(*it, v, options) << "\n";
      tensors.push_back(no_standardize ? std::move(t) : Standardize(t));
    }
    WriteContainerFile(out, tensors);
    os << "wrote " << tensors.size() << " tensors to " << out << "\n";
  }
};

struct PcaFitCmd {
  Common common;
  std::string features, split, out;
  int dim = kDefaultPcaDim;

  void Add(CLI::App *app) {
    common.Add(app, false);
    app->add_option("--features", features, "Raw feature matrix")->required();
    app->add_option("--split", split, "Fit on the training ids of this split only");
    app->add_option("--dim", dim, "Number of principal components")->check(CLI::PositiveNumber);
    app->add_option("--out", out, "Output projection (JSON)")->required();
  }

  void Run(std::ostream &os) {
    RequireFiles({&features, &split});
    FeatureMatrix fm = ReadFeatureMatrixFile(features);
    Matrix rows = fm.values;
    if (!split.empty()) {
      const Split s = ReadSplitFile(split);
      std::map<std::string, int> row_of;
      for (size_t r = 0; r < fm.ids.size(); ++r) row_of[fm.ids[r]] = static_cast<int>(r);
      rows = Matrix(static_cast<int>(s.train.size()), fm.values.cols);
      for (size_t i = 0; i < s.train.size(); ++i) {
        const auto it = row_of.find(s.train[i]);
        if (it == row_of.end()) {
          throw Error(ErrorCode::kDataError, "split id '" + s.train[i] + "' has no feature row");
        }
        const auto src = fm.values.row(it->second);
        std::copy(src.begin(), src.end(), rows.row(static_cast<int>(i)).begin());
      }
    }
    if (rows.rows == 0) throw Error(ErrorCode::kDataEmpty, "no feature rows to fit");
    const PcaProjection p = PcaFit(rows, dim);
    WritePcaFile(out, p);
    os << "fitted " << p.output_dim() << " components on " << rows.rows << " rows of dimension "
       << p.input_dim();
    if (p.padded_components > 0) os << " (" << p.padded_components << " padded with zeros)";
    os << "\n";
  }
};

struct PcaApplyCmd {
  Common common;
  std::string pca, features, out;

  void Add(CLI::App *app) {
    common.Add(app, false);
    app->add_option("--pca", pca, "Projection from pca-fit")->required();
    app->add_option("--features", features, "Raw feature matrix")->required();
    app->add_option("--out", out, "Output reduced feature matrix")->required();
  }

  void Run(std::ostream &os) {
    RequireFiles({&pca, &features});
    const PcaProjection p = ReadPcaFile(pca);
    const FeatureMatrix in = ReadFeatureMatrixFile(features);
    FeatureMatrix reduced;
    reduced.ids = in.ids;
    reduced.values = Matrix(in.values.rows, p.output_dim());
    for (int r = 0; r < in.values.rows; ++r) {
      const auto y = PcaApply(p, in.values.row(r));
      std::copy(y.begin(), y.end(), reduced.values.row(r).begin());
    }
    WriteFeatureMatrixFile(out, reduced);
    os << "projected " << in.values.rows << " rows to dimension " << p.output_dim() << "\n";
  }
};

struct SplitCmd {
  Common common;
  std::string annotations, out;

  void Add(CLI::App *app) {
    common.Add(app, true);
    app->add_option("--annotations", annotations, "Annotation file (JSON lines)")->required();
    app->add_option("--out", out, "Output split file")->required();
  }

  void Run(std::ostream &os) {
    RequireFiles({&annotations});
    std::ifstream in(annotations);
    std::vector<std::string> ids;
    for (const auto &a : ReadAnnotations(in)) ids.push_back(a.image_id);
    const Split s = MakeSplit(ids, common.seed);
    WriteSplitFile(out, s);
    os << "train " << s.train.size() << " test " << s.test.size() << "\n";
  }
};

struct GridOptions {
  double C = 0.0;
  std::string grid = "0.01,0.1,1,10,100";
  int folds = 5;

  void Add(CLI::App *app) {
    app->add_option("--C", C, "Regularization constant; 0 selects it by cross-validation")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--c-grid", grid, "Cross-validation grid for C");
    app->add_option("--folds", folds, "Cross-validation folds")->check(CLI::Range(2, 1000));
  }
};

struct TrainCmd {
  Common common;
  VocabPaths vocabs;
  DataPaths data;
  GridOptions grid;
  std::string potentials, pca, out;
  int K = 10;
  double eps = 1e-3;
  int max_passes = 50;
  bool no_trinary = false;

  void Add(CLI::App *app) {
    common.Add(app, true);
    vocabs.Add(app);
    data.Add(app, "Train on the training ids of this split");
    grid.Add(app);
    app->add_option("--potentials", potentials, "Tensor container")->required();
    app->add_option("--pca", pca, "Project raw features with this PCA and embed it");
    app->add_option("--out", out, "Output model (JSON)")->required();
    app->add_option("--K", K, "Constraints collected per example and pass")
        ->check(CLI::PositiveNumber);
    app->add_option("--eps", eps, "Constraint violation tolerance")->check(CLI::PositiveNumber);
    app->add_option("--max-passes", max_passes, "Maximum cutting-plane passes")
        ->check(CLI::PositiveNumber);
    app->add_flag("--no-trinary", no_trinary,
                  "Train without the three trinary factors (default: off)");
  }

  void Run(std::ostream &os) {
    RequireFiles({&potentials, &pca});
    const VocabularySet v = vocabs.Load();
    std::optional<PcaProjection> proj;
    if (!pca.empty()) proj = ReadPcaFile(pca);
    const auto train = ProjectAll(LoadPart(data, v, true), proj ? &*proj : nullptr);
    CheckNonEmpty(train, "training set");
    const GraphSpec spec =
        LoadGraph(potentials, v, static_cast<int>(train.front().features.size()));
    TrainOptions options;
    options.eps = eps;
    options.K = K;
    options.max_passes = max_passes;
    options.threads = common.threads;
    options.factor_mask = no_trinary ? NoTrinaryFactors() : AllFactors();
    const EvalMode mode = no_trinary ? EvalMode{EvalMode::Kind::kNoTrinary, 0} : EvalMode{};

    options.C = grid.C;
    if (grid.C == 0.0) {
      const CvResult cv =
          SelectC(train.size(), ParseGrid(grid.grid), grid.folds, common.seed,
                  [&](const std::vector<size_t> &tr, const std::vector<size_t> &va, double c) {
                    TrainOptions o = options;
                    o.C = c;
                    const TrainResult r = TrainSsvm(spec, Pick(train, tr), o);
                    return RunProtocol(spec, r.model, Pick(train, va), mode, common.threads)
                        .normalized_median_rank;
                  });
      LogCv(os, cv);
      options.C = cv.best_C;
    }
    TrainResult result = TrainSsvm(spec, train, options);
    for (const auto &p : result.model.training_log) {
      os << "pass " << p.pass << " added " << p.constraints_added << " working set "
         << p.working_set_size << " primal " << Format("%.6f", p.primal_objective)
         << " training loss " << Format("%.4f", p.training_loss) << "\n";
    }
    os << (result.converged ? "converged" : "stopped at max passes") << "\n";
    for (ConceptKind k : kAllConcepts) {
      result.model.vocab_hashes[Index(k)] = v[Index(k)]->ContentHash();
    }
    WriteModelFile(out, ModelBundle{result.model, proj});
    os << "wrote model to " << out << "\n";
  }
};

struct TrainBaselineCmd {
  Common common;
  VocabPaths vocabs;
  DataPaths data;
  GridOptions grid;
  std::string pca, out, mode = "one-vs-rest", oracle;

  void Add(CLI::App *app) {
    common.Add(app, true);
    vocabs.Add(app);
    data.Add(app, "Train on the training ids of this split");
    grid.Add(app);
    app->add_option("--mode", mode, "one-vs-rest or crammer-singer");
    app->add_option("--oracle", oracle,
                    "Append ground-truth one-hot codes for these concepts, e.g. a+o+s");
    app->add_option("--pca", pca, "Project raw features with this PCA and embed it");
    app->add_option("--out", out, "Output baseline model (JSON)")->required();
  }

  void Run(std::ostream &os) {
    RequireFiles({&pca});
    MulticlassOptions options;
    if (mode == "one-vs-rest") {
      options.mode = MulticlassMode::kOneVsRest;
    } else if (mode == "crammer-singer") {
      options.mode = MulticlassMode::kCrammerSinger;
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown baseline mode '" + mode + "'");
    }
    const uint8_t mask = oracle.empty() ? 0 : EvalMode::Parse("clamp:" + oracle).clamp_mask;
    const VocabularySet v = vocabs.Load();
    const auto dims = DimsOf(v);
    std::optional<PcaProjection> proj;
    if (!pca.empty()) proj = ReadPcaFile(pca);
    const auto train = ProjectAll(LoadPart(data, v, true), proj ? &*proj : nullptr);
    CheckNonEmpty(train, "training set");
    std::vector<std::vector<double>> x;
    std::vector<int> labels;
    for (const auto &ex : train) {
      x.push_back(AugmentWithOracle(ex.features, ex.truth, mask, dims));
      labels.push_back(ex.truth[ConceptKind::kMotivation]);
    }
    const int classes = dims[Index(ConceptKind::kMotivation)];
    auto fit = [&](const std::vector<size_t> &idx, double c) {
      std::vector<std::vector<double>> xs;
      std::vector<int> ls;
      for (size_t i : idx) {
        xs.push_back(x[i]);
        ls.push_back(labels[i]);
      }
      MulticlassOptions o = options;
      o.C = c;
      MulticlassModel m = TrainMulticlass(xs, ls, classes, o);
      m.oracle_mask = mask;
      m.oracle_dims = dims;
      return m;
    };
    options.C = grid.C;
    if (grid.C == 0.0) {
      const EvalMode em = mask ? EvalMode::Clamped(mask) : EvalMode{};
      const CvResult cv = SelectC(
          train.size(), ParseGrid(grid.grid), grid.folds, common.seed,
          [&](const std::vector<size_t> &tr, const std::vector<size_t> &va, double c) {
            return RunBaselineProtocol(fit(tr, c), dims, Pick(train, va), em, common.threads)
                .normalized_median_rank;
          });
      LogCv(os, cv);
      options.C = cv.best_C;
    }
    std::vector<size_t> all(train.size());
    for (size_t i = 0; i < all.size(); ++i) all[i] = i;
    BaselineBundle b{fit(all, options.C), proj, v[0]->ContentHash()};
    WriteBaselineFile(out, b);
    os << "wrote " << mode << " baseline to " << out << "\n";
  }
};

struct InferCmd {
  Common common;
  VocabPaths vocabs;
  std::string model, potentials, features;
  int top_k = 5;
  std::vector<std::string> ids;

  void Add(CLI::App *app) {
    common.Add(app, false);
    vocabs.Add(app);
    app->add_option("--model", model, "Model from train")->required();
    app->add_option("--potentials", potentials, "Tensor container")->required();
    app->add_option("--features", features, "Feature matrix")->required();
    app->add_option("--top-k", top_k, "Configurations printed per image")
        ->check(CLI::PositiveNumber);
    app->add_option("ids", ids, "Image ids (default: every row of the feature matrix)");
  }

  void Run(std::ostream &os) {
    RequireFiles({&model, &features});
    const VocabularySet v = vocabs.Load();
    const ModelBundle b = ReadModelFile(model);
    CheckHashes(b.model.vocab_hashes, v, "model");
    const GraphSpec spec = LoadGraph(potentials, v, b.model.feature_dim);
    const FeatureMatrix fm = ReadFeatureMatrixFile(features);
    std::map<std::string, int> row_of;
    for (size_t r = 0; r < fm.ids.size(); ++r) row_of[fm.ids[r]] = static_cast<int>(r);
    const std::vector<std::string> wanted = ids.empty() ? fm.ids : ids;
    for (const auto &id : wanted) {
      const auto it = row_of.find(id);
      if (it == row_of.end()) throw Error(ErrorCode::kDataError, "no feature row for '" + id + "'");
      const auto raw = fm.values.row(it->second);
      std::vector<double> x(raw.begin(), raw.end());
      if (b.pca) x = PcaApply(*b.pca, x);
      const int k =
          static_cast<int>(std::min<size_t>(static_cast<size_t>(top_k), spec.num_configs()));
      os << id << "\n";
      int rank = 1;
      for (const auto &sc : KBest(spec, b.model, x, k)) {
        os << "  " << rank++ << "  " << Format("%.6f", sc.score) << "  " << ConfigText(sc.config, v)
           << "\n";
      }
    }
  }
};

struct EvalCmd {
  Common common;
  VocabPaths vocabs;
  DataPaths data;
  std::string model, baseline, potentials, mode = "automatic", report;

  void Add(CLI::App *app) {
    common.Add(app, false);
    vocabs.Add(app);
    data.Add(app, "Evaluate on the test ids of this split");
    auto *m = app->add_option("--model", model, "Model from train");
    auto *b = app->add_option("--baseline", baseline, "Baseline from train-baseline");
    m->excludes(b);
    app->add_option("--potentials", potentials, "Tensor container (with --model)");
    app->add_option("--mode", mode, "automatic, no-trinary, or clamp:<subset of a+o+s>");
    app->add_option("--report", report, "Write <prefix>.json, <prefix>.txt and <prefix>.csv");
  }

  void Run(std::ostream &os) {
    if (model.empty() == baseline.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "give exactly one of --model and --baseline");
    }
    if (!model.empty() && potentials.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "--model needs --potentials");
    }
    RequireFiles({&model, &baseline, &potentials});
    const EvalMode em = EvalMode::Parse(mode);
    const VocabularySet v = vocabs.Load();
    const auto raw = LoadPart(data, v, false);
    CheckNonEmpty(raw, "test set");
    EvalReport r;
    if (!model.empty()) {
      const ModelBundle b = ReadModelFile(model);
      CheckHashes(b.model.vocab_hashes, v, "model");
      const GraphSpec spec = LoadGraph(potentials, v, b.model.feature_dim);
      r = RunProtocol(spec, b.model, ProjectAll(raw, b.pca ? &*b.pca : nullptr), em,
                      common.threads);
    } else {
      const BaselineBundle b = ReadBaselineFile(baseline);
      if (b.motivation_hash && *b.motivation_hash != v[0]->ContentHash()) {
        throw Error(ErrorCode::kVocabularyMismatch,
                    "baseline was trained with a different motivation vocabulary");
      }
      r = RunBaselineProtocol(b.model, DimsOf(v), ProjectAll(raw, b.pca ? &*b.pca : nullptr), em,
                              common.threads);
    }
    const Vocabulary *names = &*v[Index(ConceptKind::kMotivation)];
    WriteReportText(os, r, names);
    if (!report.empty()) {
      std::ofstream json(report + ".json"), text(report + ".txt"), csv(report + ".csv");
      if (!json || !text || !csv) throw Error(ErrorCode::kIoError, "cannot write " + report + ".*");
      WriteReportJson(json, r, names);
      WriteReportText(text, r, names);
      WriteAccuracyCsv(csv, r);
    }
  }
};

// Flags on the command line win; keys from --config fill the rest.
std::vector<std::string> ExpandConfig(CLI::App &app, const std::vector<std::string> &args) {
  const auto sub_it =
      std::find_if(args.begin(), args.end(), [](const std::string &a) { return a[0] != '-'; });
  if (sub_it == args.end()) return args;
  CLI::App *sub = nullptr;
  try {
    sub = app.get_subcommand(*sub_it);
  } catch (const CLI::OptionNotFound &) {
    return args;
  }
  std::string path;
  for (size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open config file " + path);
  std::vector<std::string> out = args;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const auto eq = line.find('=');
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    if (trim(line).empty()) continue;
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kParseError,
                  path + " line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string flag = "--" + key;
    const CLI::Option *opt = sub->get_option_no_throw(flag);
    if (!opt || key == "config") {
      throw Error(ErrorCode::kInvalidArgument, path + " line " + std::to_string(line_no) +
                                                   ": unknown key '" + key + "' for " +
                                                   sub->get_name());
    }
    const bool given = std::any_of(args.begin(), args.end(), [&](const std::string &a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
    if (given) continue;
    if (opt->get_type_size_max() == 0) {
      if (value == "true" || value == "1" || value == "yes") out.push_back(flag);
    } else {
      out.push_back(flag + "=" + value);
    }
  }
  return out;
}

}  // namespace

int RunCli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app(
      "Infers the motivation behind a person's action from image features and "
      "language-model potentials.",
      "whyact");
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  BuildPotentialsCmd build;
  PcaFitCmd pca_fit;
  PcaApplyCmd pca_apply;
  SplitCmd split;
  TrainCmd train;
  TrainBaselineCmd train_baseline;
  InferCmd infer;
  EvalCmd eval;
  std::map<CLI::App *, std::function<void()>> actions;
  auto add = [&](auto &cmd, const char *name, const char *help) {
    CLI::App *sub = app.add_subcommand(name, help);
    cmd.Add(sub);
    actions[sub] = [&cmd, &out] { cmd.Run(out); };
  };
  add(build, "build-potentials", "Build the 13 language potential tensors");
  add(pca_fit, "pca-fit", "Fit a PCA projection to raw features");
  add(pca_apply, "pca-apply", "Project a feature matrix with a fitted PCA");
  add(split, "split", "Make a seeded train/test split");
  add(train, "train", "Train the full model with the structured SVM");
  add(train_baseline, "train-baseline", "Train a vision-only motivation classifier");
  add(infer, "infer", "Print the top configurations for images");
  add(eval, "eval", "Evaluate motivation ranks and write reports");

  try {
    std::vector<std::string> argv = ExpandConfig(app, args);
    std::reverse(argv.begin(), argv.end());
    app.parse(std::move(argv));
    for (auto &[sub, action] : actions) {
      if (sub->parsed()) action();
    }
    return 0;
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError &e) {
    err << "error: " << ErrorCodeName(ErrorCode::kInvalidArgument) << ": " << e.what() << "\n";
    return 2;
  } catch (const Error &e) {
    err << "error: " << ErrorCodeName(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception &e) {
    err << "error: INTERNAL: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace whyact
