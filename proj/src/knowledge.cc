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

#include "whyact/knowledge.h"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "whyact/binary_io.h"
#include "whyact/error.h"
#include "whyact/parallel.h"

namespace whyact {

std::string_view ConceptName(ConceptKind k) {
  switch (k) {
    case ConceptKind::kMotivation:
      return "motivation";
    case ConceptKind::kAction:
      return "action";
    case ConceptKind::kObject:
      return "object";
    case ConceptKind::kScene:
      return "scene";
  }
  return "?";
}

char ConceptLetter(ConceptKind k) { return ConceptName(k)[0]; }

std::optional<ConceptKind> ParseConcept(std::string_view s) {
  std::string lower(s);
  for (auto &c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (ConceptKind k : kAllConcepts) {
    if (lower == ConceptName(k) || (lower.size() == 1 && lower[0] == ConceptLetter(k))) {
      return k;
    }
  }
  return std::nullopt;
}

std::string NormalizeTerm(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

// --- Vocabulary -------------------------------------------------------------

Vocabulary::Vocabulary(ConceptKind kind, std::vector<std::string> terms) : kind_(kind) {
  for (auto &t : terms) {
    std::string n = NormalizeTerm(t);
    if (n.empty()) {
      throw Error(ErrorCode::kParseError,
                  std::string(ConceptName(kind)) + " vocabulary has an empty term");
    }
    if (std::find(terms_.begin(), terms_.end(), n) != terms_.end()) {
      throw Error(ErrorCode::kParseError,
                  std::string(ConceptName(kind)) + " vocabulary repeats term '" + n + "'");
    }
    terms_.push_back(std::move(n));
  }
}

Vocabulary Vocabulary::Load(std::istream &in, ConceptKind kind) {
  std::vector<std::string> terms;
  std::string line;
  while (std::getline(in, line)) {
    if (NormalizeTerm(line).empty()) continue;
    terms.push_back(line);
  }
  return Vocabulary(kind, std::move(terms));
}

Vocabulary Vocabulary::LoadFile(const std::string &path, ConceptKind kind) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open vocabulary " + path);
  try {
    return Load(in, kind);
  } catch (const Error &e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

void Vocabulary::Write(std::ostream &out) const {
  for (const auto &t : terms_) out << t << '\n';
}

std::vector<std::string> Vocabulary::Tokens(int i) const {
  std::vector<std::string> out;
  std::istringstream ss(terms_.at(i));
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

std::optional<int> Vocabulary::Find(std::string_view term) const {
  const std::string n = NormalizeTerm(term);
  const auto it = std::find(terms_.begin(), terms_.end(), n);
  if (it == terms_.end()) return std::nullopt;
  return static_cast<int>(it - terms_.begin());
}

namespace {

size_t EditDistance(std::string_view a, std::string_view b) {
  std::vector<size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (size_t j = 1; j <= b.size(); ++j) {
      cur[j] =
          std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace

std::string Vocabulary::Nearest(std::string_view term) const {
  const std::string n = NormalizeTerm(term);
  std::string best;
  size_t best_d = SIZE_MAX;
  for (const auto &t : terms_) {
    const size_t d = EditDistance(n, t);
    if (d < best_d) {
      best_d = d;
      best = t;
    }
  }
  return best;
}

uint64_t Vocabulary::ContentHash() const {
  uint64_t h = Fnv1a64(ConceptName(kind_));
  for (const auto &t : terms_) {
    h = Fnv1a64("\n", h);
    h = Fnv1a64(t, h);
  }
  return h;
}

// --- Relation ---------------------------------------------------------------

Relation::Relation(std::initializer_list<ConceptKind> kinds) {
  for (ConceptKind k : kinds) mask_ |= static_cast<uint8_t>(1u << Index(k));
}

Relation Relation::FromMask(uint8_t mask) {
  Relation r;
  r.mask_ = mask & 0x0f;
  return r;
}

std::optional<Relation> Relation::Parse(std::string_view s) {
  Relation r;
  size_t i = 0;
  while (i <= s.size()) {
    size_t j = s.find_first_of("+,", i);
    if (j == std::string_view::npos) j = s.size();
    std::string_view part = s.substr(i, j - i);
    while (!part.empty() && std::isspace(static_cast<unsigned char>(part.front())))
      part.remove_prefix(1);
    while (!part.empty() && std::isspace(static_cast<unsigned char>(part.back())))
      part.remove_suffix(1);
    const auto k = ParseConcept(part);
    if (!k || r.Contains(*k)) return std::nullopt;
    r.mask_ |= static_cast<uint8_t>(1u << Index(*k));
    i = j + 1;
  }
  if (r.mask_ == 0) return std::nullopt;
  return r;
}

int Relation::arity() const { return std::popcount(static_cast<unsigned>(mask_)); }

std::vector<ConceptKind> Relation::kinds() const {
  std::vector<ConceptKind> out;
  for (ConceptKind k : kAllConcepts) {
    if (Contains(k)) out.push_back(k);
  }
  return out;
}

std::string Relation::Name() const {
  std::string out;
  for (ConceptKind k : kinds()) {
    if (!out.empty()) out += '+';
    out += ConceptName(k);
  }
  return out;
}

const std::array<Relation, kNumFactors> &DefaultFactorList() {
  using K = ConceptKind;
  static const std::array<Relation, kNumFactors> kList = {
      Relation{K::kMotivation},
      Relation{K::kAction},
      Relation{K::kObject},
      Relation{K::kScene},
      Relation{K::kMotivation, K::kAction},
      Relation{K::kMotivation, K::kObject},
      Relation{K::kMotivation, K::kScene},
      Relation{K::kAction, K::kObject},
      Relation{K::kAction, K::kScene},
      Relation{K::kObject, K::kScene},
      Relation{K::kAction, K::kObject, K::kMotivation},
      Relation{K::kAction, K::kObject, K::kScene},
      Relation{K::kAction, K::kScene, K::kMotivation},
  };
  return kList;
}

int FactorIndex(Relation r) {
  const auto &list = DefaultFactorList();
  for (int i = 0; i < kNumFactors; ++i) {
    if (list[i] == r) return i;
  }
  return -1;
}

// --- Templates --------------------------------------------------------------

Template ParseTemplate(std::string_view text, Relation relation) {
  Template out;
  uint8_t seen = 0;
  std::string word;
  auto flush = [&] {
    if (word.empty()) return;
    TemplateToken tok;
    if (word == "PRONOUN") {
      tok.type = TemplateToken::Type::kPronoun;
    } else if (word == "MOTIVATION" || word == "ACTION" || word == "OBJECT" || word == "SCENE") {
      tok.type = TemplateToken::Type::kSlot;
      tok.slot = *ParseConcept(word);
      if (!relation.Contains(tok.slot)) {
        throw Error(ErrorCode::kParseError, "template '" + std::string(text) + "' uses slot " +
                                                word + " outside relation " + relation.Name());
      }
      seen |= static_cast<uint8_t>(1u << Index(tok.slot));
    } else {
      tok.text = NormalizeTerm(word);
    }
    out.push_back(std::move(tok));
    word.clear();
  };
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else if (c == ',' || c == '.' || c == ';' || c == '?' || c == '!') {
      flush();
      word.push_back(c);
      flush();
    } else {
      word.push_back(c);
    }
  }
  flush();
  if (seen != relation.mask()) {
    throw Error(ErrorCode::kParseError, "template '" + std::string(text) +
                                            "' does not mention every slot of " + relation.Name());
  }
  return out;
}

std::string TemplateText(const Template &t) {
  std::string out;
  for (const auto &tok : t) {
    if (!out.empty()) out += ' ';
    switch (tok.type) {
      case TemplateToken::Type::kLiteral:
        out += tok.text;
        break;
      case TemplateToken::Type::kPronoun:
        out += "PRONOUN";
        break;
      case TemplateToken::Type::kSlot: {
        std::string name(ConceptName(tok.slot));
        for (auto &c : name) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        out += name;
      }
    }
  }
  return out;
}

std::vector<TemplateSet> ParseTemplates(std::istream &in) {
  std::vector<TemplateSet> sets;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (NormalizeTerm(line).empty()) continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) {
      throw Error(ErrorCode::kParseError,
                  "template line " + std::to_string(line_no) + ": missing ':'");
    }
    const auto relation = Relation::Parse(std::string_view(line).substr(0, colon));
    if (!relation) {
      throw Error(ErrorCode::kParseError, "template line " + std::to_string(line_no) +
                                              ": bad relation '" + line.substr(0, colon) + "'");
    }
    Template t;
    try {
      t = ParseTemplate(std::string_view(line).substr(colon + 1), *relation);
    } catch (const Error &e) {
      throw Error(e.code(), "template line " + std::to_string(line_no) + ": " + e.what());
    }
    auto it = std::find_if(sets.begin(), sets.end(),
                           [&](const TemplateSet &s) { return s.relation == *relation; });
    if (it == sets.end()) {
      sets.push_back(TemplateSet{*relation, {}});
      it = sets.end() - 1;
    }
    it->templates.push_back(std::move(t));
  }
  return sets;
}

std::vector<TemplateSet> LoadTemplatesFile(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open template file " + path);
  try {
    return ParseTemplates(in);
  } catch (const Error &e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

// --- Tensors ----------------------------------------------------------------

size_t PotentialTensor::Offset(std::span<const int> idx) const {
  size_t off = 0;
  for (size_t i = 0; i < dims.size(); ++i) {
    off = off * static_cast<size_t>(dims[i]) + static_cast<size_t>(idx[i]);
  }
  return off;
}

namespace {

bool UsesPronoun(const Template &t) {
  return std::any_of(t.begin(), t.end(), [](const TemplateToken &tok) {
    return tok.type == TemplateToken::Type::kPronoun;
  });
}

}  // namespace

uint64_t CountQueries(const TemplateSet &tset, const VocabularySet &vocabs,
                      const BuildOptions &options) {
  uint64_t cells = 1;
  for (ConceptKind k : tset.relation.kinds()) {
    if (!vocabs[Index(k)]) return 0;
    cells *= static_cast<uint64_t>(vocabs[Index(k)]->size());
  }
  uint64_t per_cell = 0;
  for (const auto &t : tset.templates) {
    per_cell += UsesPronoun(t) ? options.pronouns.size() : 1;
  }
  return cells * per_cell;
}

PotentialTensor BuildTensor(const LanguageModel &lm, const VocabularySet &vocabs,
                            const TemplateSet &tset, const BuildOptions &options) {
  const auto kinds = tset.relation.kinds();
  if (tset.templates.empty()) {
    throw Error(ErrorCode::kMissingTemplate, "no templates for relation " + tset.relation.Name());
  }
  PotentialTensor out;
  out.relation = tset.relation;
  // Pre-tokenized terms per relation position.
  std::vector<std::vector<std::vector<std::string>>> tokens(kinds.size());
  for (size_t p = 0; p < kinds.size(); ++p) {
    const auto &vocab = vocabs[Index(kinds[p])];
    if (!vocab) {
      throw Error(ErrorCode::kInvalidArgument,
                  "template slot " + std::string(ConceptName(kinds[p])) + " has no vocabulary");
    }
    out.dims.push_back(vocab->size());
    out.vocab_hashes.push_back(vocab->ContentHash());
    for (int i = 0; i < vocab->size(); ++i) tokens[p].push_back(vocab->Tokens(i));
  }
  for (const auto &t : tset.templates) {
    if (UsesPronoun(t) && options.pronouns.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "template uses PRONOUN but the pronoun list is empty");
    }
  }
  size_t cells = 1;
  for (int d : out.dims) cells *= static_cast<size_t>(d);
  out.values.assign(cells, 0.0);

  // Position of each concept kind within the relation.
  std::array<int, kNumConcepts> position{};
  for (size_t p = 0; p < kinds.size(); ++p) position[Index(kinds[p])] = static_cast<int>(p);

  ParallelFor(cells, options.threads, [&](size_t cell) {
    std::vector<int> idx(kinds.size());
    size_t rest = cell;
    for (size_t p = kinds.size(); p-- > 0;) {
      idx[p] = static_cast<int>(rest % out.dims[p]);
      rest /= out.dims[p];
    }
    std::vector<double> scores;
    std::vector<std::string> sentence;
    for (const auto &t : tset.templates) {
      const bool pronoun = UsesPronoun(t);
      const size_t expansions = pronoun ? options.pronouns.size() : 1;
      for (size_t e = 0; e < expansions; ++e) {
        sentence.clear();
        for (const auto &tok : t) {
          switch (tok.type) {
            case TemplateToken::Type::kLiteral:
              sentence.push_back(tok.text);
              break;
            case TemplateToken::Type::kPronoun:
              sentence.push_back(NormalizeTerm(options.pronouns[e]));
              break;
            case TemplateToken::Type::kSlot: {
              const int p = position[Index(tok.slot)];
              const auto &term = tokens[p][idx[p]];
              sentence.insert(sentence.end(), term.begin(), term.end());
              break;
            }
          }
        }
        scores.push_back(lm.ScoreSequence(sentence, options.boundary).per_token);
      }
    }
    // Sorted summation keeps the cell independent of template order.
    std::sort(scores.begin(), scores.end());
    double sum = 0.0;
    for (double s : scores) sum += s;
    out.values[cell] = sum / static_cast<double>(scores.size());
  });
  return out;
}

TensorMoments Moments(std::span<const double> values) {
  TensorMoments m;
  if (values.empty()) return m;
  double sum = 0.0;
  for (double v : values) sum += v;
  m.mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - m.mean) * (v - m.mean);
  m.stddev = std::sqrt(ss / static_cast<double>(values.size()));
  return m;
}

PotentialTensor Standardize(const PotentialTensor &t) {
  PotentialTensor out = t;
  const TensorMoments m = Moments(t.values);
  out.normalization.standardized = true;
  if (!(m.stddev > 0.0)) {
    // Degenerate: identity transform, nothing to compose.
    return out;
  }
  for (auto &v : out.values) v = (v - m.mean) / m.stddev;
  // raw = (value * m.stddev + m.mean) * old.stddev + old.mean
  const Normalization &old = t.normalization;
  out.normalization.mean = old.mean + old.stddev * m.mean;
  out.normalization.stddev = old.stddev * m.stddev;
  return out;
}

}  // namespace whyact
