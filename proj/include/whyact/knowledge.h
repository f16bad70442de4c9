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

#ifndef WHYACT_KNOWLEDGE_H_
#define WHYACT_KNOWLEDGE_H_

#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "whyact/arpa_lm.h"

namespace whyact {

// The four concept variables, in canonical index order y1..y4.
enum class ConceptKind : uint8_t { kMotivation = 0, kAction = 1, kObject = 2, kScene = 3 };

inline constexpr int kNumConcepts = 4;
inline constexpr std::array<ConceptKind, kNumConcepts> kAllConcepts = {
    ConceptKind::kMotivation, ConceptKind::kAction, ConceptKind::kObject, ConceptKind::kScene};

inline int Index(ConceptKind k) { return static_cast<int>(k); }
std::string_view ConceptName(ConceptKind k);  // "motivation", ...
char ConceptLetter(ConceptKind k);            // 'm', 'a', 'o', 's'
// Accepts full names, single letters, or upper-case slot names.
std::optional<ConceptKind> ParseConcept(std::string_view s);

// Lowercases and collapses runs of whitespace to single spaces.
std::string NormalizeTerm(std::string_view s);

class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(ConceptKind kind, std::vector<std::string> terms);

  // One term per line; blank lines are skipped. Terms are normalized.
  static Vocabulary Load(std::istream &in, ConceptKind kind);
  static Vocabulary LoadFile(const std::string &path, ConceptKind kind);
  void Write(std::ostream &out) const;

  ConceptKind kind() const { return kind_; }
  int size() const { return static_cast<int>(terms_.size()); }
  const std::string &term(int i) const { return terms_.at(i); }
  const std::vector<std::string> &terms() const { return terms_; }
  std::vector<std::string> Tokens(int i) const;

  // Index of a term after normalization.
  std::optional<int> Find(std::string_view term) const;
  // Closest term by edit distance, for error messages.
  std::string Nearest(std::string_view term) const;

  uint64_t ContentHash() const;

 private:
  ConceptKind kind_ = ConceptKind::kMotivation;
  std::vector<std::string> terms_;
};

using VocabularySet = std::array<std::optional<Vocabulary>, kNumConcepts>;

// A set of concepts joined by one factor; kinds() is in canonical order.
class Relation {
 public:
  Relation() = default;
  explicit Relation(std::initializer_list<ConceptKind> kinds);
  static Relation FromMask(uint8_t mask);
  // "action+object+motivation", "a,o,m", ...; order does not matter.
  static std::optional<Relation> Parse(std::string_view s);

  uint8_t mask() const { return mask_; }
  bool Contains(ConceptKind k) const { return mask_ & (1u << Index(k)); }
  int arity() const;
  std::vector<ConceptKind> kinds() const;
  std::string Name() const;  // canonical order, '+'-joined full names

  friend bool operator==(Relation a, Relation b) { return a.mask_ == b.mask_; }

 private:
  uint8_t mask_ = 0;
};

inline constexpr int kNumFactors = 13;

// The 13 factors of the motivation graph: 4 unaries, all 6 pairs, and the
// trinaries {a,o,m}, {a,o,s}, {a,s,m}. The {o,s,m} trinary is left out.
// Positions in this list index the language weights u.
const std::array<Relation, kNumFactors> &DefaultFactorList();
int FactorIndex(Relation r);  // -1 when not a default factor

// A template token is either literal text or a slot.
struct TemplateToken {
  enum class Type : uint8_t { kLiteral, kSlot, kPronoun };
  Type type = Type::kLiteral;
  std::string text;                             // kLiteral
  ConceptKind slot = ConceptKind::kMotivation;  // kSlot
};

using Template = std::vector<TemplateToken>;

struct TemplateSet {
  Relation relation;
  std::vector<Template> templates;
};

// Parses "relation_kinds: template text" lines. '#' starts a comment.
// Templates for the same relation are grouped in first-seen order.
std::vector<TemplateSet> ParseTemplates(std::istream &in);
std::vector<TemplateSet> LoadTemplatesFile(const std::string &path);
// Tokenizes one template; throws kParseError on a slot outside `relation`
// or a missing relation slot.
Template ParseTemplate(std::string_view text, Relation relation);
std::string TemplateText(const Template &t);

struct Normalization {
  double mean = 0.0;
  double stddev = 1.0;
  bool standardized = false;
};

// Dense score table over the vocabularies of a relation. Row-major, the
// last concept of kinds() varies fastest.
struct PotentialTensor {
  Relation relation;
  std::vector<int> dims;
  std::vector<uint64_t> vocab_hashes;  // parallel to relation.kinds()
  std::vector<double> values;
  Normalization normalization;

  size_t size() const { return values.size(); }
  // Flat index for one index per relation kind, in kinds() order.
  size_t Offset(std::span<const int> idx) const;
};

struct BuildOptions {
  bool boundary = false;
  std::vector<std::string> pronouns = {"he", "she"};
  int threads = 1;
};

// Fills every cell with the mean per-token log10 score of all template and
// pronoun instantiations.
PotentialTensor BuildTensor(const LanguageModel &lm, const VocabularySet &vocabs,
                            const TemplateSet &tset, const BuildOptions &options);

// Number of sequence scores BuildTensor issues for `tset`.
uint64_t CountQueries(const TemplateSet &tset, const VocabularySet &vocabs,
                      const BuildOptions &options);

struct TensorMoments {
  double mean = 0.0;
  double stddev = 0.0;  // population
};
TensorMoments Moments(std::span<const double> values);

// Shifts to zero mean and scales to unit population standard deviation.
// Constant tensors pass through with stddev recorded as 1. The recorded
// normalization composes, so raw = value * stddev + mean still holds after
// repeated calls.
PotentialTensor Standardize(const PotentialTensor &t);

}  // namespace whyact

#endif  // WHYACT_KNOWLEDGE_H_
