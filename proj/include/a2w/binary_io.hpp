// a2w/binary_io.hpp

// Copyright 2026  The a2w Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef A2W_BINARY_IO_HPP_
#define A2W_BINARY_IO_HPP_

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "a2w/error.hpp"

namespace a2w::binary {

// Explicit little-endian encoding, independent of host byte order.

inline void WriteU32(std::ostream &os, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 4);
}

inline void WriteU64(std::ostream &os, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 8);
}

inline void WriteF32(std::ostream &os, float v) { WriteU32(os, std::bit_cast<std::uint32_t>(v)); }
inline void WriteF64(std::ostream &os, double v) { WriteU64(os, std::bit_cast<std::uint64_t>(v)); }

inline void WriteString(std::ostream &os, const std::string &s) {
  WriteU32(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

/// Reads little-endian fields and tracks the byte offset so that truncation
/// errors can say exactly where the payload ran out.
class Reader {
 public:
  explicit Reader(std::istream &is, std::string what = "stream")
      : is_(is), what_(std::move(what)) {}

  std::size_t offset() const { return offset_; }

  void ReadBytes(char *dst, std::size_t n) {
    is_.read(dst, static_cast<std::streamsize>(n));
    const auto got = static_cast<std::size_t>(is_.gcount());
    if (got != n)
      throw FormatError(ErrorKind::kTruncated,
                        what_ + ": truncated at byte offset " + std::to_string(offset_ + got) +
                            " (needed " + std::to_string(n - got) + " more bytes)",
                        offset_ + got);
    offset_ += n;
  }

  std::uint32_t U32() {
    unsigned char b[4];
    ReadBytes(reinterpret_cast<char *>(b), 4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }

  std::uint64_t U64() {
    unsigned char b[8];
    ReadBytes(reinterpret_cast<char *>(b), 8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }

  float F32() { return std::bit_cast<float>(U32()); }
  double F64() { return std::bit_cast<double>(U64()); }

  std::string String(std::uint32_t max_len = 1u << 20) {
    const std::size_t at = offset_;
    const std::uint32_t n = U32();
    if (n > max_len)
      throw FormatError(ErrorKind::kMalformedHeader,
                        what_ + ": implausible string length at byte offset " + std::to_string(at),
                        at);
    std::string s(n, '\0');
    ReadBytes(s.data(), n);
    return s;
  }

  [[noreturn]] void Malformed(const std::string &msg, std::size_t at) const {
    throw FormatError(ErrorKind::kMalformedHeader,
                      what_ + ": " + msg + " at byte offset " + std::to_string(at), at);
  }

 private:
  std::istream &is_;
  std::string what_;
  std::size_t offset_ = 0;
};

}  // namespace a2w::binary

#endif  // A2W_BINARY_IO_HPP_
