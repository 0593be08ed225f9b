#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace viramem {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data that cannot be used: malformed files, schema violations,
/// missing assets. Maps to CLI exit code 2.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A record that is structurally invalid (as opposed to one that is valid
/// but rejected by a collection criterion).
class ValidationError : public DataError {
 public:
  using DataError::DataError;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : DataError(what + " (line " + std::to_string(line) + ")"), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Degenerate or singular numerical problems. Maps to CLI exit code 3.
class NumericError : public Error {
 public:
  using Error::Error;
};

class ProtocolError : public Error {
 public:
  using Error::Error;
};

class FetchError : public Error {
 public:
  FetchError(const std::string& what, int status) : Error(what), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

}  // namespace viramem
