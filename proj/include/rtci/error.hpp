#pragma once

#include <stdexcept>
#include <string>

namespace rtci {

/// Base for every error raised by the library. The CLI maps subclasses to
/// exit codes: ParseError/UsageError -> 2, EstimationError -> 3,
/// TestUndefinedError -> 4.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

class ParseError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "parse_error"; }
};

class UsageError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "usage_error"; }
};

class DimensionError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "dimension_error"; }
};

class EstimationError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "estimation_error"; }
};

class SingularError : public EstimationError {
 public:
  using EstimationError::EstimationError;
  const char* kind() const noexcept override { return "singular"; }
};

class UnderdeterminedError : public EstimationError {
 public:
  using EstimationError::EstimationError;
  const char* kind() const noexcept override { return "underdetermined"; }
};

}  // namespace rtci
