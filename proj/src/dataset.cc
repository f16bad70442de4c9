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

#include "whyact/dataset.h"

#include <fstream>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "whyact/binary_io.h"
#include "whyact/error.h"

namespace whyact {

using nlohmann::json;

std::string FeatureIdsPath(const std::string &matrix_path) { return matrix_path + ".ids"; }

void WriteFeatureMatrix(std::ostream &matrix, std::ostream &ids, const FeatureMatrix &fm) {
  if (fm.ids.size() != static_cast<size_t>(fm.values.rows)) {
    throw Error(ErrorCode::kInvalidArgument, "feature ids and rows disagree");
  }
  matrix.write(kFeatureMagic, sizeof kFeatureMagic);
  WriteU64(matrix, static_cast<uint64_t>(fm.values.rows));
  WriteU64(matrix, static_cast<uint64_t>(fm.values.cols));
  WriteF64s(matrix, fm.values.data);
  for (const auto &id : fm.ids) ids << id << '\n';
  if (!matrix || !ids) throw Error(ErrorCode::kIoError, "failed writing feature matrix");
}

FeatureMatrix ReadFeatureMatrix(std::istream &matrix, std::istream &ids) {
  char magic[8];
  ReadBytes(matrix, magic, sizeof magic, "feature magic");
  if (std::string_view(magic, 8) != std::string_view(kFeatureMagic, 8)) {
    throw Error(ErrorCode::kFormatError, "not a feature matrix (bad magic)");
  }
  const uint64_t rows = ReadU64(matrix, "feature row count");
  const uint64_t dim = ReadU64(matrix, "feature dimension");
  if (rows > (1ull << 31) || dim > (1ull << 31) || rows * dim > (1ull << 34)) {
    throw Error(ErrorCode::kFormatError, "implausible feature matrix shape");
  }
  FeatureMatrix fm;
  fm.values = Matrix(static_cast<int>(rows), static_cast<int>(dim));
  std::string bytes(rows * dim * 8, '\0');
  ReadBytes(matrix, bytes.data(), bytes.size(), "feature values");
  DecodeF64s(bytes.data(), fm.values.data);
  std::string line;
  while (std::getline(ids, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    fm.ids.push_back(line);
  }
  if (fm.ids.size() != rows) {
    throw Error(ErrorCode::kDataError, "feature id sidecar lists " + std::to_string(fm.ids.size()) +
                                           " ids for " + std::to_string(rows) + " rows");
  }
  return fm;
}

void WriteFeatureMatrixFile(const std::string &path, const FeatureMatrix &fm) {
  std::ofstream matrix(path, std::ios::binary);
  std::ofstream ids(FeatureIdsPath(path));
  if (!matrix || !ids) throw Error(ErrorCode::kIoError, "cannot create " + path);
  WriteFeatureMatrix(matrix, ids, fm);
}

FeatureMatrix ReadFeatureMatrixFile(const std::string &path) {
  std::ifstream matrix(path, std::ios::binary);
  std::ifstream ids(FeatureIdsPath(path));
  if (!matrix) throw Error(ErrorCode::kIoError, "cannot open " + path);
  if (!ids) throw Error(ErrorCode::kIoError, "cannot open " + FeatureIdsPath(path));
  try {
    return ReadFeatureMatrix(matrix, ids);
  } catch (const Error &e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

std::vector<Annotation> ReadAnnotations(std::istream &in) {
  std::vector<Annotation> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (NormalizeTerm(line).empty()) continue;
    try {
      const json j = json::parse(line);
      Annotation a;
      a.image_id = j.at("image_id").get<std::string>();
      for (ConceptKind k : kAllConcepts) {
        a.labels[Index(k)] = j.at(std::string(ConceptName(k))).get<std::string>();
      }
      out.push_back(std::move(a));
    } catch (const json::exception &e) {
      throw Error(ErrorCode::kParseError,
                  "annotation line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void WriteAnnotations(std::ostream &out, const std::vector<Annotation> &annotations) {
  for (const auto &a : annotations) {
    json j;
    j["image_id"] = a.image_id;
    for (ConceptKind k : kAllConcepts) j[std::string(ConceptName(k))] = a.labels[Index(k)];
    out << j.dump() << '\n';
  }
}

std::vector<Example> LoadDataset(const std::vector<Annotation> &annotations,
                                 const FeatureMatrix &features, const VocabularySet &vocabs,
                                 bool reduced) {
  for (ConceptKind k : kAllConcepts) {
    if (!vocabs[Index(k)]) {
      throw Error(ErrorCode::kInvalidArgument,
                  "missing " + std::string(ConceptName(k)) + " vocabulary");
    }
  }
  std::unordered_map<std::string, int> row_of;
  for (size_t r = 0; r < features.ids.size(); ++r) {
    if (!row_of.emplace(features.ids[r], static_cast<int>(r)).second) {
      throw Error(ErrorCode::kDataError, "duplicate feature row for '" + features.ids[r] + "'");
    }
  }
  std::unordered_set<std::string> seen;
  std::vector<Example> out;
  out.reserve(annotations.size());
  for (const auto &a : annotations) {
    if (!seen.insert(a.image_id).second) {
      throw Error(ErrorCode::kDataError, "duplicate image_id '" + a.image_id + "'");
    }
    Example ex;
    ex.image_id = a.image_id;
    ex.reduced = reduced;
    for (ConceptKind k : kAllConcepts) {
      const Vocabulary &v = *vocabs[Index(k)];
      const auto idx = v.Find(a.labels[Index(k)]);
      if (!idx) {
        throw Error(ErrorCode::kUnknownTerm, "image '" + a.image_id + "': unknown " +
                                                 std::string(ConceptName(k)) + " term '" +
                                                 a.labels[Index(k)] + "' (did you mean '" +
                                                 v.Nearest(a.labels[Index(k)]) + "'?)");
      }
      ex.truth[k] = *idx;
    }
    const auto row = row_of.find(a.image_id);
    if (row == row_of.end()) {
      throw Error(ErrorCode::kDataError, "no feature row for image '" + a.image_id + "'");
    }
    const auto values = features.values.row(row->second);
    ex.features.assign(values.begin(), values.end());
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<Example> LoadDatasetFiles(const std::string &annotations_path,
                                      const std::string &features_path, const VocabularySet &vocabs,
                                      bool reduced) {
  std::ifstream in(annotations_path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + annotations_path);
  std::vector<Annotation> annotations;
  try {
    annotations = ReadAnnotations(in);
  } catch (const Error &e) {
    throw Error(e.code(), annotations_path + ": " + e.what());
  }
  return LoadDataset(annotations, ReadFeatureMatrixFile(features_path), vocabs, reduced);
}

std::vector<Annotation> ToAnnotations(const std::vector<Example> &examples,
                                      const VocabularySet &vocabs) {
  std::vector<Annotation> out;
  for (const auto &ex : examples) {
    Annotation a;
    a.image_id = ex.image_id;
    for (ConceptKind k : kAllConcepts) a.labels[Index(k)] = vocabs[Index(k)]->term(ex.truth[k]);
    out.push_back(std::move(a));
  }
  return out;
}

FeatureMatrix ToFeatureMatrix(const std::vector<Example> &examples) {
  FeatureMatrix fm;
  const int dim = examples.empty() ? 0 : static_cast<int>(examples.front().features.size());
  fm.values = Matrix(static_cast<int>(examples.size()), dim);
  for (size_t r = 0; r < examples.size(); ++r) {
    if (static_cast<int>(examples[r].features.size()) != dim) {
      throw Error(ErrorCode::kDataError, "feature length differs across examples");
    }
    fm.ids.push_back(examples[r].image_id);
    std::copy(examples[r].features.begin(), examples[r].features.end(),
              fm.values.row(static_cast<int>(r)).begin());
  }
  return fm;
}

namespace {

// Unbiased draw in [0, n) from a fully specified engine, so splits are the
// same on every standard library.
uint64_t UniformBelow(std::mt19937_64 &rng, uint64_t n) {
  const uint64_t threshold = (0 - n) % n;
  for (;;) {
    const uint64_t r = rng();
    if (r >= threshold) return r % n;
  }
}

}  // namespace

std::vector<size_t> Permutation(size_t n, uint64_t seed) {
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  for (size_t i = n; i > 1; --i) std::swap(order[i - 1], order[UniformBelow(rng, i)]);
  return order;
}

Split MakeSplit(const std::vector<std::string> &ids, uint64_t seed) {
  if (ids.size() < 2) throw Error(ErrorCode::kDataEmpty, "a split needs at least two ids");
  std::vector<std::string> order;
  order.reserve(ids.size());
  for (size_t i : Permutation(ids.size(), seed)) order.push_back(ids[i]);
  Split split;
  split.seed = seed;
  const size_t n_train = (order.size() + 1) / 2;
  split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  return split;
}

void WriteSplit(std::ostream &out, const Split &split) {
  json j;
  j["version"] = "why-split/1";
  j["seed"] = split.seed;
  j["train"] = split.train;
  j["test"] = split.test;
  out << j.dump(1) << '\n';
}

Split ReadSplit(std::istream &in) {
  try {
    const json j = json::parse(in);
    if (j.at("version") != "why-split/1") {
      throw Error(ErrorCode::kFormatError, "unsupported split version");
    }
    Split s;
    s.seed = j.at("seed").get<uint64_t>();
    s.train = j.at("train").get<std::vector<std::string>>();
    s.test = j.at("test").get<std::vector<std::string>>();
    std::unordered_set<std::string> seen;
    for (const auto *part : {&s.train, &s.test}) {
      for (const auto &id : *part) {
        if (!seen.insert(id).second) {
          throw Error(ErrorCode::kDataError, "split lists '" + id + "' twice");
        }
      }
    }
    return s;
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kFormatError, std::string("bad split file: ") + e.what());
  }
}

void WriteSplitFile(const std::string &path, const Split &split) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot create " + path);
  WriteSplit(out, split);
}

Split ReadSplitFile(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  return ReadSplit(in);
}

std::vector<Example> Select(const std::vector<Example> &examples,
                            const std::vector<std::string> &ids) {
  std::unordered_map<std::string, size_t> index;
  for (size_t i = 0; i < examples.size(); ++i) index.emplace(examples[i].image_id, i);
  std::vector<Example> out;
  out.reserve(ids.size());
  for (const auto &id : ids) {
    const auto it = index.find(id);
    if (it == index.end()) {
      throw Error(ErrorCode::kDataError, "split id '" + id + "' is not in the dataset");
    }
    out.push_back(examples[it->second]);
  }
  return out;
}

}  // namespace whyact
