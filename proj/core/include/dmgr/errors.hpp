// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace dmgr {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor or vector dimensions disagree with what an operation expects.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Input violates a documented precondition or data invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A loss, gradient or parameter became NaN/Inf.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// Malformed structured input; carries the 1-based line and byte offset.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t offset)
      : Error(what + " (line " + std::to_string(line) + ", offset " +
              std::to_string(offset) + ")"),
        line_(line),
        offset_(offset) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t line_;
  std::size_t offset_;
};

/// Run configuration is missing or invalid.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace dmgr
