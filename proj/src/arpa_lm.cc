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

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "whyact/error.h"

namespace whyact {
namespace {

constexpr std::string_view kUnk = "<unk>";
constexpr std::string_view kBos = "<s>";
constexpr std::string_view kEos = "</s>";

[[noreturn]] void Fail(size_t line, const std::string &msg) {
  throw Error(ErrorCode::kParseError, "ARPA line " + std::to_string(line) + ": " + msg);
}

std::vector<std::string_view> SplitFields(std::string_view s) {
  std::vector<std::string_view> out;
  size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) {
    s.remove_suffix(1);
  }
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

bool ParseDouble(std::string_view s, double *out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), *out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool ParseSize(std::string_view s, size_t *out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), *out);
  return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

// Matches "\k-grams:" and returns k, or 0.
size_t SectionOrder(std::string_view line) {
  if (line.size() < 9 || line.front() != '\\') return 0;
  constexpr std::string_view kSuffix = "-grams:";
  if (line.substr(line.size() - kSuffix.size()) != kSuffix) return 0;
  size_t k = 0;
  if (!ParseSize(line.substr(1, line.size() - 1 - kSuffix.size()), &k)) return 0;
  return k;
}

}  // namespace

NGramModel NGramModel::LoadArpa(std::istream &in) {
  NGramModel model;
  std::string raw;
  size_t line_no = 0;

  // Anything before \data\ is ignored, as most tools do.
  bool found_data = false;
  while (std::getline(in, raw)) {
    ++line_no;
    if (Trim(raw) == "\\data\\") {
      found_data = true;
      break;
    }
  }
  if (!found_data) Fail(line_no, "missing \\data\\ header");

  std::vector<size_t> declared;
  std::string_view line;
  bool have_pending = false;
  while (std::getline(in, raw)) {
    ++line_no;
    line = Trim(raw);
    if (line.empty()) continue;
    if (line.rfind("ngram ", 0) != 0) {
      have_pending = true;
      break;
    }
    const auto eq = line.find('=');
    size_t k = 0, count = 0;
    if (eq == std::string_view::npos || !ParseSize(Trim(line.substr(6, eq - 6)), &k) ||
        !ParseSize(Trim(line.substr(eq + 1)), &count)) {
      Fail(line_no, "malformed header line '" + std::string(line) + "'");
    }
    if (k != declared.size() + 1) {
      Fail(line_no, "header orders must be consecutive from 1, got ngram " + std::to_string(k));
    }
    declared.push_back(count);
  }
  if (declared.empty()) Fail(line_no, "header declares no n-gram counts");
  model.order_ = static_cast<int>(declared.size());
  model.counts_.assign(declared.size(), 0);

  size_t current = 0;  // order of the section being read
  bool ended = false;
  std::vector<uint32_t> ids;
  while (have_pending || std::getline(in, raw)) {
    if (!have_pending) {
      ++line_no;
      line = Trim(raw);
    }
    have_pending = false;
    if (line.empty()) continue;

    if (line.front() == '\\') {
      if (current > 0 && model.counts_[current - 1] != declared[current - 1]) {
        Fail(line_no, "count mismatch for " + std::to_string(current) + "-grams: header declares " +
                          std::to_string(declared[current - 1]) + ", found " +
                          std::to_string(model.counts_[current - 1]));
      }
      if (line == "\\end\\") {
        ended = true;
        break;
      }
      const size_t k = SectionOrder(line);
      if (k == 0) Fail(line_no, "unrecognized section '" + std::string(line) + "'");
      if (k > declared.size()) {
        Fail(line_no,
             std::to_string(k) + "-grams exceed declared order " + std::to_string(declared.size()));
      }
      if (k != current + 1) {
        Fail(line_no, "expected \\" + std::to_string(current + 1) + "-grams: section, got \\" +
                          std::to_string(k) + "-grams:");
      }
      current = k;
      continue;
    }

    if (current == 0) Fail(line_no, "n-gram line outside of a section");
    const auto fields = SplitFields(line);
    if (fields.size() < current + 1) {
      Fail(line_no, "expected " + std::to_string(current) + " tokens");
    }
    if (fields.size() > current + 2) {
      Fail(line_no, "too many fields for a " + std::to_string(current) +
                        "-gram (n-gram longer than its section order?)");
    }
    NGramEntry entry;
    if (!ParseDouble(fields[0], &entry.log10_prob)) {
      Fail(line_no, "non-numeric probability '" + std::string(fields[0]) + "'");
    }
    if (!std::isfinite(entry.log10_prob)) Fail(line_no, "non-finite probability");
    const bool is_bos = current == 1 && fields[1] == kBos;
    if (entry.log10_prob > 0.0 && !is_bos) {
      Fail(line_no, "positive log10 probability");
    }
    if (fields.size() == current + 2) {
      if (static_cast<int>(current) == model.order_) {
        Fail(line_no, "backoff weight on a highest-order n-gram");
      }
      if (!ParseDouble(fields.back(), &entry.backoff) || !std::isfinite(entry.backoff)) {
        Fail(line_no, "non-numeric backoff '" + std::string(fields.back()) + "'");
      }
      entry.has_backoff = true;
    }

    ids.clear();
    uint32_t parent = kRoot;
    for (size_t t = 0; t < current; ++t) {
      const std::string_view tok = fields[1 + t];
      if (current == 1) {
        if (model.word_ids_.count(std::string(tok))) {
          Fail(line_no, "duplicate unigram '" + std::string(tok) + "'");
        }
        const auto id = static_cast<uint32_t>(model.words_.size());
        model.words_.emplace_back(tok);
        model.word_ids_.emplace(std::string(tok), id);
        if (tok == kUnk) model.unk_ = id;
        ids.push_back(id);
        break;
      }
      const uint32_t id = model.WordId(tok);
      if (id == kNoWord) {
        Fail(line_no, "token '" + std::string(tok) + "' has no unigram entry");
      }
      if (t + 1 < current) {
        const auto it = model.children_.find(Key(parent, id));
        if (it == model.children_.end()) {
          Fail(line_no, "context of " + std::to_string(current) + "-gram is not a listed n-gram");
        }
        parent = it->second;
      }
      ids.push_back(id);
    }
    const auto index = static_cast<uint32_t>(model.entries_.size());
    if (!model.children_.emplace(Key(parent, ids.back()), index).second) {
      Fail(line_no, "duplicate " + std::to_string(current) + "-gram");
    }
    model.entries_.push_back(entry);
    ++model.counts_[current - 1];
  }
  if (!ended) Fail(line_no, "missing \\end\\ marker");
  for (size_t k = 0; k < declared.size(); ++k) {
    if (model.counts_[k] != declared[k]) {
      Fail(line_no, "count mismatch for " + std::to_string(k + 1) + "-grams: header declares " +
                        std::to_string(declared[k]) + ", found " +
                        std::to_string(model.counts_[k]));
    }
  }
  return model;
}

NGramModel NGramModel::LoadArpaFile(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open ARPA file " + path);
  try {
    return LoadArpa(in);
  } catch (const Error &e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

uint32_t NGramModel::WordId(std::string_view token) const {
  const auto it = word_ids_.find(std::string(token));
  return it == word_ids_.end() ? kNoWord : it->second;
}

bool NGramModel::InVocab(std::string_view token) const { return WordId(token) != kNoWord; }

uint32_t NGramModel::Lookup(std::span<const uint32_t> ids) const {
  uint32_t node = kRoot;
  for (uint32_t id : ids) {
    if (id == kNoWord) return kRoot;
    const auto it = children_.find(Key(node, id));
    if (it == children_.end()) return kRoot;
    node = it->second;
  }
  return node;
}

std::optional<NGramEntry> NGramModel::Find(std::span<const std::string> tokens) const {
  if (tokens.empty() || tokens.size() > static_cast<size_t>(order_)) return {};
  std::vector<uint32_t> ids;
  for (const auto &t : tokens) ids.push_back(WordId(t));
  const uint32_t e = Lookup(ids);
  if (e == kRoot) return {};
  return entries_[e];
}

double NGramModel::LogProbIds(std::span<const uint32_t> context, uint32_t word) const {
  if (word == kNoWord) return oov_floor_;
  double penalty = 0.0;
  std::vector<uint32_t> full(context.begin(), context.end());
  full.push_back(word);
  for (size_t start = 0;; ++start) {
    std::span<const uint32_t> ngram(full.data() + start, full.size() - start);
    const uint32_t e = Lookup(ngram);
    if (e != kRoot) return penalty + entries_[e].log10_prob;
    // Unigrams always exist for in-vocabulary words, so start never runs
    // past the word itself.
    const uint32_t ctx = Lookup(ngram.first(ngram.size() - 1));
    if (ctx != kRoot) penalty += entries_[ctx].backoff;
  }
}

double NGramModel::LogProbWord(std::span<const std::string> context, std::string_view word) const {
  const size_t keep = std::min(context.size(), static_cast<size_t>(order_ - 1));
  std::vector<uint32_t> ctx;
  ctx.reserve(keep);
  for (size_t i = context.size() - keep; i < context.size(); ++i) {
    const uint32_t id = WordId(context[i]);
    ctx.push_back(id == kNoWord ? unk_ : id);
  }
  const uint32_t w = WordId(word);
  return LogProbIds(ctx, w == kNoWord ? unk_ : w);
}

SequenceScore NGramModel::ScoreSequence(std::span<const std::string> tokens, bool boundary) const {
  std::vector<uint32_t> ids;
  ids.reserve(tokens.size() + 2);
  auto map = [&](std::string_view tok) {
    const uint32_t id = WordId(tok);
    return id == kNoWord ? unk_ : id;
  };
  if (boundary) ids.push_back(map(kBos));
  const size_t first_scored = ids.size();
  for (const auto &t : tokens) ids.push_back(map(t));
  if (boundary) ids.push_back(map(kEos));

  SequenceScore score;
  const size_t max_ctx = static_cast<size_t>(order_ - 1);
  for (size_t i = first_scored; i < ids.size(); ++i) {
    const size_t ctx_len = std::min(i, max_ctx);
    score.total += LogProbIds(std::span<const uint32_t>(ids.data() + i - ctx_len, ctx_len), ids[i]);
    ++score.scored_tokens;
  }
  score.per_token = score.scored_tokens > 0 ? score.total / score.scored_tokens : 0.0;
  return score;
}

}  // namespace whyact
