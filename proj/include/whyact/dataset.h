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

#ifndef WHYACT_DATASET_H_
#define WHYACT_DATASET_H_

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "whyact/graph.h"
#include "whyact/knowledge.h"
#include "whyact/model.h"

namespace whyact {

struct Example {
  std::string image_id;
  std::vector<double> features;
  bool reduced = false;  // features went through PCA
  Configuration truth;
};

// Feature matrix file: "WHYFEA1\0", u64 rows, u64 dim, then rows*dim f64 LE
// values row-major. Row ids live in a sidecar text file, one per line.
inline constexpr char kFeatureMagic[8] = {'W', 'H', 'Y', 'F', 'E', 'A', '1', '\0'};

struct FeatureMatrix {
  std::vector<std::string> ids;
  Matrix values;
};

std::string FeatureIdsPath(const std::string &matrix_path);  // path + ".ids"

void WriteFeatureMatrix(std::ostream &matrix, std::ostream &ids, const FeatureMatrix &fm);
FeatureMatrix ReadFeatureMatrix(std::istream &matrix, std::istream &ids);
void WriteFeatureMatrixFile(const std::string &path, const FeatureMatrix &fm);
FeatureMatrix ReadFeatureMatrixFile(const std::string &path);

// One annotation per line: {"image_id", "action", "object", "scene",
// "motivation"} as strings.
struct Annotation {
  std::string image_id;
  std::array<std::string, kNumConcepts> labels;  // canonical concept order
};
std::vector<Annotation> ReadAnnotations(std::istream &in);
void WriteAnnotations(std::ostream &out, const std::vector<Annotation> &annotations);

// Resolves labels against the vocabularies and joins feature rows by id.
// Errors: kUnknownTerm (with nearest suggestion), kDataError for missing
// rows, length mismatches and duplicate ids.
std::vector<Example> LoadDataset(const std::vector<Annotation> &annotations,
                                 const FeatureMatrix &features, const VocabularySet &vocabs,
                                 bool reduced = false);
std::vector<Example> LoadDatasetFiles(const std::string &annotations_path,
                                      const std::string &features_path, const VocabularySet &vocabs,
                                      bool reduced = false);

// Inverse of LoadDataset.
std::vector<Annotation> ToAnnotations(const std::vector<Example> &examples,
                                      const VocabularySet &vocabs);
FeatureMatrix ToFeatureMatrix(const std::vector<Example> &examples);

struct Split {
  uint64_t seed = 0;
  std::vector<std::string> train;
  std::vector<std::string> test;
};

// Seeded Fisher-Yates permutation of 0..n-1, identical on every platform.
std::vector<size_t> Permutation(size_t n, uint64_t seed);

// Seeded Fisher-Yates shuffle; the first ceil(n/2) ids train.
Split MakeSplit(const std::vector<std::string> &ids, uint64_t seed);

void WriteSplit(std::ostream &out, const Split &split);
Split ReadSplit(std::istream &in);
void WriteSplitFile(const std::string &path, const Split &split);
Split ReadSplitFile(const std::string &path);

// Examples whose ids appear in `ids`, in the order of `ids`.
std::vector<Example> Select(const std::vector<Example> &examples,
                            const std::vector<std::string> &ids);

}  // namespace whyact

#endif  // WHYACT_DATASET_H_
