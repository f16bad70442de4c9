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

#ifndef WHYACT_CONTAINER_H_
#define WHYACT_CONTAINER_H_

#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "whyact/knowledge.h"

namespace whyact {

// Potential tensor container, version 1:
//
//   "WHYPOT1\0"                   8 bytes
//   manifest length               u64 LE
//   manifest                      JSON text (format version, vocabulary
//                                 hashes and sizes, per-tensor relation,
//                                 dims, element offset, normalization)
//   payload                       f64 LE values, tensors concatenated,
//                                 row-major (last concept fastest)
//   crc32(payload)                u32 LE
inline constexpr char kContainerMagic[8] = {'W', 'H', 'Y', 'P', 'O', 'T', '1', '\0'};
inline constexpr int kContainerVersion = 1;

// Per-concept vocabulary hash; empty when a concept is not used.
using VocabularyHashes = std::array<std::optional<uint64_t>, kNumConcepts>;

VocabularyHashes HashesOf(const VocabularySet &vocabs);

void WriteContainer(std::ostream &out, const std::vector<PotentialTensor> &tensors);
void WriteContainerFile(const std::string &path, const std::vector<PotentialTensor> &tensors);

// Reads a container. When `expected` is given, every vocabulary hash in
// the file must match it (kVocabularyMismatch otherwise).
std::vector<PotentialTensor> ReadContainer(std::istream &in,
                                           const VocabularyHashes *expected = nullptr);
std::vector<PotentialTensor> ReadContainerFile(const std::string &path,
                                               const VocabularyHashes *expected = nullptr);

}  // namespace whyact

#endif  // WHYACT_CONTAINER_H_
