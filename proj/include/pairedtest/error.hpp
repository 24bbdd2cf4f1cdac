#pragma once

#include <stdexcept>
#include <string>

namespace pairedtest {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input-side failures. The CLI maps these to exit code 2.
class InputError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public InputError {
 public:
  using InputError::InputError;
};

class PairingError : public InputError {
 public:
  using InputError::InputError;
};

class ParseError : public InputError {
 public:
  using InputError::InputError;
};

class ValidationError : public InputError {
 public:
  using InputError::InputError;
};

class DomainError : public InputError {
 public:
  using InputError::InputError;
};

/// Method-level failures. The CLI maps these to exit code 3.
class MethodError : public Error {
 public:
  using Error::Error;
};

/// A statistic or rule is undefined for the given data (all-zero
/// differences, zero pooled variance, coincident pair, zero rule).
class DegenerateError : public MethodError {
 public:
  using MethodError::MethodError;
};

/// Covariance factorization hit a non-positive pivot.
class SingularityError : public MethodError {
 public:
  using MethodError::MethodError;
};

/// Requested p-value mode is not available for this input.
class ModeError : public MethodError {
 public:
  using MethodError::MethodError;
};

class InsufficientDataError : public MethodError {
 public:
  using MethodError::MethodError;
};

/// A coincident (x == y) pair. Carries the offending row.
class DegeneratePairError : public DegenerateError {
 public:
  DegeneratePairError(const std::string& what, std::size_t row)
      : DegenerateError(what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

}  // namespace pairedtest
