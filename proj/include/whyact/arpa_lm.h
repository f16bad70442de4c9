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

#ifndef WHYACT_ARPA_LM_H_
#define WHYACT_ARPA_LM_H_

#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace whyact {

// Result of scoring a token sequence. Both values are log10.
struct SequenceScore {
  double total = 0.0;
  double per_token = 0.0;  // total / number of scored tokens
  int scored_tokens = 0;
};

// Anything that can score a token sequence. The knowledge builder only needs
// this much, which lets tests substitute counting stubs.
class LanguageModel {
 public:
  virtual ~LanguageModel() = default;
  virtual SequenceScore ScoreSequence(std::span<const std::string> tokens, bool boundary) const = 0;
};

struct NGramEntry {
  double log10_prob = 0.0;
  double backoff = 0.0;
  bool has_backoff = false;
};

// Backoff n-gram model read from an ARPA file. Immutable after loading, so
// concurrent queries are safe.
class NGramModel : public LanguageModel {
 public:
  static constexpr double kDefaultOovFloor = -7.0;

  // Parses ARPA text. Throws Error(kParseError) with a line number on any
  // malformed input.
  static NGramModel LoadArpa(std::istream &in);
  static NGramModel LoadArpaFile(const std::string &path);

  int order() const { return order_; }
  bool has_unk() const { return unk_ != kNoWord; }
  size_t vocab_size() const { return words_.size(); }
  size_t num_entries(int n) const { return counts_.at(n - 1); }
  bool InVocab(std::string_view token) const;

  double oov_floor() const { return oov_floor_; }
  void set_oov_floor(double floor) { oov_floor_ = floor; }

  // Exact lookup of a stored n-gram.
  std::optional<NGramEntry> Find(std::span<const std::string> tokens) const;

  // log10 P(word | context) with standard backoff. Context longer than
  // order-1 is truncated from the left.
  double LogProbWord(std::span<const std::string> context, std::string_view word) const;

  // Sums LogProbWord over the tokens. With `boundary` set, <s> is prepended
  // as context and </s> is appended as a scored token.
  SequenceScore ScoreSequence(std::span<const std::string> tokens, bool boundary) const override;

 private:
  static constexpr uint32_t kNoWord = UINT32_MAX;
  static constexpr uint32_t kRoot = UINT32_MAX;

  static uint64_t Key(uint32_t parent, uint32_t word) {
    return (static_cast<uint64_t>(parent) << 32) | word;
  }

  uint32_t WordId(std::string_view token) const;
  // Entry index for the n-gram spelled by ids, or kRoot if absent.
  uint32_t Lookup(std::span<const uint32_t> ids) const;
  double LogProbIds(std::span<const uint32_t> context, uint32_t word) const;

  int order_ = 0;
  double oov_floor_ = kDefaultOovFloor;
  uint32_t unk_ = kNoWord;
  std::vector<size_t> counts_;
  std::vector<std::string> words_;
  std::unordered_map<std::string, uint32_t> word_ids_;
  std::vector<NGramEntry> entries_;
  // (parent entry, word) -> entry; unigrams hang off kRoot.
  std::unordered_map<uint64_t, uint32_t> children_;
};

}  // namespace whyact

#endif  // WHYACT_ARPA_LM_H_
