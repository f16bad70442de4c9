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

#include "whyact/container.h"

#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "whyact/binary_io.h"
#include "whyact/error.h"

namespace whyact {

using nlohmann::json;

VocabularyHashes HashesOf(const VocabularySet &vocabs) {
  VocabularyHashes out;
  for (int c = 0; c < kNumConcepts; ++c) {
    if (vocabs[c]) out[c] = vocabs[c]->ContentHash();
  }
  return out;
}

void WriteContainer(std::ostream &out, const std::vector<PotentialTensor> &tensors) {
  VocabularyHashes hashes;
  std::array<int, kNumConcepts> sizes{};
  json manifest;
  manifest["format"] = "whypot";
  manifest["version"] = kContainerVersion;
  json entries = json::array();
  uint64_t offset = 0;
  for (const auto &t : tensors) {
    const auto kinds = t.relation.kinds();
    if (kinds.size() != t.dims.size() || kinds.size() != t.vocab_hashes.size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "tensor " + t.relation.Name() + " has inconsistent shape metadata");
    }
    size_t cells = 1;
    json relation = json::array();
    for (size_t p = 0; p < kinds.size(); ++p) {
      const int c = Index(kinds[p]);
      if (hashes[c] && (*hashes[c] != t.vocab_hashes[p] || sizes[c] != t.dims[p])) {
        throw Error(ErrorCode::kVocabularyMismatch, "tensors were built against different " +
                                                        std::string(ConceptName(kinds[p])) +
                                                        " vocabularies");
      }
      hashes[c] = t.vocab_hashes[p];
      sizes[c] = t.dims[p];
      cells *= static_cast<size_t>(t.dims[p]);
      relation.push_back(ConceptName(kinds[p]));
    }
    if (cells != t.values.size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "tensor " + t.relation.Name() + " value count does not match dims");
    }
    entries.push_back({{"relation", relation},
                       {"dims", t.dims},
                       {"offset", offset},
                       {"mean", t.normalization.mean},
                       {"std", t.normalization.stddev},
                       {"standardized", t.normalization.standardized}});
    offset += cells;
  }
  json vocabs = json::object();
  for (ConceptKind k : kAllConcepts) {
    const int c = Index(k);
    if (!hashes[c]) continue;
    vocabs[std::string(ConceptName(k))] = {{"hash", HashToHex(*hashes[c])}, {"size", sizes[c]}};
  }
  manifest["vocabularies"] = vocabs;
  manifest["tensors"] = entries;
  manifest["payload_values"] = offset;

  const std::string text = manifest.dump();
  std::ostringstream payload;
  for (const auto &t : tensors) WriteF64s(payload, t.values);
  const std::string bytes = payload.str();

  out.write(kContainerMagic, sizeof kContainerMagic);
  WriteU64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  WriteU32(out, Crc32(bytes));
  if (!out) throw Error(ErrorCode::kIoError, "failed writing tensor container");
}

void WriteContainerFile(const std::string &path, const std::vector<PotentialTensor> &tensors) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot create " + path);
  WriteContainer(out, tensors);
}

std::vector<PotentialTensor> ReadContainer(std::istream &in, const VocabularyHashes *expected) {
  char magic[8];
  ReadBytes(in, magic, sizeof magic, "container magic");
  if (std::memcmp(magic, kContainerMagic, 6) != 0) {
    throw Error(ErrorCode::kFormatError, "not a potential container (bad magic)");
  }
  if (std::memcmp(magic, kContainerMagic, sizeof magic) != 0) {
    throw Error(ErrorCode::kFormatError, "unsupported container version");
  }
  const uint64_t manifest_len = ReadU64(in, "manifest length");
  if (manifest_len > (1ull << 32)) {
    throw Error(ErrorCode::kFormatError, "implausible manifest length");
  }
  std::string text(manifest_len, '\0');
  ReadBytes(in, text.data(), text.size(), "manifest");

  json manifest;
  try {
    manifest = json::parse(text);
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kFormatError, std::string("bad container manifest: ") + e.what());
  }

  std::vector<PotentialTensor> tensors;
  uint64_t total = 0;
  try {
    if (manifest.at("format") != "whypot" ||
        manifest.at("version").get<int>() != kContainerVersion) {
      throw Error(ErrorCode::kFormatError, "container version mismatch");
    }
    VocabularyHashes file_hashes;
    for (ConceptKind k : kAllConcepts) {
      const std::string name(ConceptName(k));
      const auto &v = manifest.at("vocabularies");
      if (!v.contains(name)) continue;
      file_hashes[Index(k)] = HexToHash(v.at(name).at("hash").get<std::string>());
      if (expected && (*expected)[Index(k)] && *(*expected)[Index(k)] != *file_hashes[Index(k)]) {
        throw Error(ErrorCode::kVocabularyMismatch,
                    "container was built for a different " + name + " vocabulary");
      }
    }
    for (const auto &entry : manifest.at("tensors")) {
      PotentialTensor t;
      for (const auto &name : entry.at("relation")) {
        const auto k = ParseConcept(name.get<std::string>());
        if (!k) throw Error(ErrorCode::kFormatError, "unknown concept in manifest");
        t.relation = Relation::FromMask(t.relation.mask() | (1u << Index(*k)));
        if (!file_hashes[Index(*k)]) {
          throw Error(ErrorCode::kFormatError, "tensor references an undeclared vocabulary");
        }
        t.vocab_hashes.push_back(*file_hashes[Index(*k)]);
      }
      t.dims = entry.at("dims").get<std::vector<int>>();
      t.normalization.mean = entry.at("mean").get<double>();
      t.normalization.stddev = entry.at("std").get<double>();
      t.normalization.standardized = entry.at("standardized").get<bool>();
      if (t.dims.size() != t.vocab_hashes.size() || entry.at("offset").get<uint64_t>() != total) {
        throw Error(ErrorCode::kFormatError, "inconsistent tensor entry in manifest");
      }
      uint64_t cells = 1;
      for (int d : t.dims) {
        if (d <= 0) throw Error(ErrorCode::kFormatError, "non-positive tensor dim");
        cells *= static_cast<uint64_t>(d);
      }
      t.values.resize(cells);
      total += cells;
      tensors.push_back(std::move(t));
    }
    if (manifest.at("payload_values").get<uint64_t>() != total) {
      throw Error(ErrorCode::kFormatError, "manifest payload size disagrees with tensors");
    }
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kFormatError, std::string("bad container manifest: ") + e.what());
  }

  std::string bytes(total * 8, '\0');
  ReadBytes(in, bytes.data(), bytes.size(), "tensor payload");
  const uint32_t stored_crc = ReadU32(in, "payload checksum");
  if (Crc32(bytes) != stored_crc) {
    throw Error(ErrorCode::kChecksumError, "tensor payload checksum mismatch");
  }
  size_t offset = 0;
  for (auto &t : tensors) {
    DecodeF64s(bytes.data() + offset * 8, t.values);
    offset += t.values.size();
  }
  return tensors;
}

std::vector<PotentialTensor> ReadContainerFile(const std::string &path,
                                               const VocabularyHashes *expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  try {
    return ReadContainer(in, expected);
  } catch (const Error &e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

}  // namespace whyact
