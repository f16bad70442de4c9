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

#ifndef WHYACT_BINARY_IO_H_
#define WHYACT_BINARY_IO_H_

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>

namespace whyact {

// Little-endian primitives shared by the binary container formats. Reads
// throw Error(kFormatError) on a short stream.

void WriteU32(std::ostream &out, uint32_t v);
void WriteU64(std::ostream &out, uint64_t v);
void WriteF64(std::ostream &out, double v);
void WriteF64s(std::ostream &out, std::span<const double> values);

uint32_t ReadU32(std::istream &in, std::string_view what);
uint64_t ReadU64(std::istream &in, std::string_view what);
void ReadBytes(std::istream &in, char *dst, size_t n, std::string_view what);

// Decodes n little-endian doubles from raw bytes.
void DecodeF64s(const char *src, std::span<double> dst);

uint32_t Crc32(std::string_view bytes);

std::string HashToHex(uint64_t hash);
uint64_t HexToHash(std::string_view hex);

// 64-bit FNV-1a.
uint64_t Fnv1a64(std::string_view bytes, uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace whyact

#endif  // WHYACT_BINARY_IO_H_
