#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace morphcx {

/// Base class for every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. `line` is 1-based; 0 when no line applies.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Not enough data to carry out the request (too few paradigms, empty sets).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A requested score or slot is absent.
class LookupError : public Error {
 public:
  using Error::Error;
};

/// Process exit codes used by the command-line driver.
enum class ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kParse = 2,
  kNoData = 3,
  kInternal = 4,
};

}  // namespace morphcx
