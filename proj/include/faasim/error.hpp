#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace faasim {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input text could not be decoded. Carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A value violates a domain invariant (bad config, capacity below peak, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace faasim
