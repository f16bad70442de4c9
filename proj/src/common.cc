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

#include <zlib.h>

#include <bit>
#include <charconv>
#include <cstring>
#include <string>

#include "whyact/binary_io.h"
#include "whyact/error.h"

namespace whyact {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return "INVALID_ARGUMENT";
    case ErrorCode::kParseError:
      return "PARSE_ERROR";
    case ErrorCode::kFormatError:
      return "FORMAT_ERROR";
    case ErrorCode::kChecksumError:
      return "CHECKSUM_ERROR";
    case ErrorCode::kVocabularyMismatch:
      return "VOCAB_MISMATCH";
    case ErrorCode::kUnknownTerm:
      return "UNKNOWN_TERM";
    case ErrorCode::kMissingTemplate:
      return "MISSING_TEMPLATE";
    case ErrorCode::kDataEmpty:
      return "DATA_EMPTY";
    case ErrorCode::kDataError:
      return "DATA_ERROR";
    case ErrorCode::kIoError:
      return "IO_ERROR";
    case ErrorCode::kQpFailure:
      return "QP_FAILURE";
  }
  return "UNKNOWN";
}

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

template <typename T>
T ToLittle(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    T out;
    auto *src = reinterpret_cast<const unsigned char *>(&v);
    auto *dst = reinterpret_cast<unsigned char *>(&out);
    for (size_t i = 0; i < sizeof(T); ++i) dst[i] = src[sizeof(T) - 1 - i];
    return out;
  } else {
    return v;
  }
}

template <typename T>
void WriteRaw(std::ostream &out, T v) {
  v = ToLittle(v);
  out.write(reinterpret_cast<const char *>(&v), sizeof(T));
}

}  // namespace

void WriteU32(std::ostream &out, uint32_t v) { WriteRaw(out, v); }
void WriteU64(std::ostream &out, uint64_t v) { WriteRaw(out, v); }
void WriteF64(std::ostream &out, double v) { WriteRaw(out, std::bit_cast<uint64_t>(v)); }

void WriteF64s(std::ostream &out, std::span<const double> values) {
  for (double v : values) WriteF64(out, v);
}

void ReadBytes(std::istream &in, char *dst, size_t n, std::string_view what) {
  in.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<size_t>(in.gcount()) != n) {
    throw Error(ErrorCode::kFormatError, "truncated input while reading " + std::string(what));
  }
}

uint32_t ReadU32(std::istream &in, std::string_view what) {
  uint32_t v;
  ReadBytes(in, reinterpret_cast<char *>(&v), sizeof v, what);
  return ToLittle(v);
}

uint64_t ReadU64(std::istream &in, std::string_view what) {
  uint64_t v;
  ReadBytes(in, reinterpret_cast<char *>(&v), sizeof v, what);
  return ToLittle(v);
}

void DecodeF64s(const char *src, std::span<double> dst) {
  for (size_t i = 0; i < dst.size(); ++i) {
    uint64_t bits;
    std::memcpy(&bits, src + 8 * i, 8);
    dst[i] = std::bit_cast<double>(ToLittle(bits));
  }
}

uint32_t Crc32(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in slices.
  constexpr size_t kSlice = 1u << 30;
  size_t offset = 0;
  while (offset < bytes.size()) {
    const size_t n = std::min(kSlice, bytes.size() - offset);
    crc = crc32(crc, reinterpret_cast<const Bytef *>(bytes.data() + offset), static_cast<uInt>(n));
    offset += n;
  }
  return static_cast<uint32_t>(crc);
}

std::string HashToHex(uint64_t hash) {
  char buf[17];
  auto [end, ec] = std::to_chars(buf, buf + 16, hash, 16);
  std::string digits(buf, end);
  return std::string(16 - digits.size(), '0') + digits;
}

uint64_t HexToHash(std::string_view hex) {
  uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), v, 16);
  if (ec != std::errc() || ptr != hex.data() + hex.size() || hex.size() != 16) {
    throw Error(ErrorCode::kFormatError, "bad hash string '" + std::string(hex) + "'");
  }
  return v;
}

uint64_t Fnv1a64(std::string_view bytes, uint64_t seed) {
  uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace whyact
