/// @file  errors.hpp
/// @brief Exception types shared across the library.

#pragma once

#include <stdexcept>
#include <string>

namespace rckl {

/// A file or configuration document could not be parsed.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& message, int line = 0)
      : std::runtime_error(message), line_(line) {}

  /// 1-based line number of the offending input, 0 when not applicable.
  int line() const { return line_; }

 private:
  int line_;
};

/// Shapes or object counts of two inputs do not match.
class DimensionError : public std::runtime_error {
 public:
  explicit DimensionError(const std::string& message)
      : std::runtime_error(message) {}
};

/// The optimizer produced a non-finite objective.
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& message)
      : std::runtime_error(message) {}
};

/// A dense linear-algebra routine failed to converge.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& message)
      : std::runtime_error(message) {}
};

}  // namespace rckl
