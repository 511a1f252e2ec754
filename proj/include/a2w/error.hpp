// a2w/error.hpp

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

#ifndef A2W_ERROR_HPP_
#define A2W_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace a2w {

/// Error categories. The CLI maps each one to its own exit code.
enum class ErrorKind {
  kInvalidArgument,
  kDimensionMismatch,
  kInfeasibleTarget,
  kMalformedHeader,
  kTruncated,
  kUnknownLabel,
  kIo,
  kStaleTape,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised when a target has no alignment of the available length.
class InfeasibleTargetError : public Error {
 public:
  explicit InfeasibleTargetError(const std::string &what)
      : Error(ErrorKind::kInfeasibleTarget, what) {}
};

/// Parse failure in one of the on-disk formats. Carries the line (text
/// formats, 1-based) or byte offset (binary formats) where it was detected.
class FormatError : public Error {
 public:
  FormatError(ErrorKind kind, const std::string &what, std::size_t position)
      : Error(kind, what), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

[[noreturn]] inline void Fail(ErrorKind kind, const std::string &what) {
  throw Error(kind, what);
}

inline void Require(bool cond, const std::string &what,
                    ErrorKind kind = ErrorKind::kInvalidArgument) {
  if (!cond) throw Error(kind, what);
}

}  // namespace a2w

#endif  // A2W_ERROR_HPP_
