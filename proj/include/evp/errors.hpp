#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace evp {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape or argument contract violated by the caller.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unreadable matrix / parameter / snapshot file.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Base of failures that originate in floating-point arithmetic.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Cholesky pivot at (1-based) column `pivot_index` was not positive.
class NotPositiveDefinite : public NumericalError {
 public:
  explicit NotPositiveDefinite(std::int64_t pivot_index)
      : NumericalError("matrix is not positive definite: non-positive pivot at column " +
                       std::to_string(pivot_index)),
        pivot_index_(pivot_index) {}
  std::int64_t pivot_index() const noexcept { return pivot_index_; }

 private:
  std::int64_t pivot_index_;
};

/// Triangular factor has a zero or negative diagonal entry at (1-based) `index`.
class SingularFactor : public NumericalError {
 public:
  explicit SingularFactor(std::int64_t index)
      : NumericalError("triangular factor is singular at diagonal entry " + std::to_string(index)),
        index_(index) {}
  std::int64_t index() const noexcept { return index_; }

 private:
  std::int64_t index_;
};

/// The tridiagonal QL iteration did not converge on off-diagonal entry `index` (0-based).
class ConvergenceError : public NumericalError {
 public:
  explicit ConvergenceError(std::int64_t index)
      : NumericalError("tridiagonal QL iteration failed to converge at off-diagonal entry " +
                       std::to_string(index)),
        index_(index) {}
  std::int64_t index() const noexcept { return index_; }

 private:
  std::int64_t index_;
};

/// A finite value does not fit the narrower target precision.
class PrecisionOverflow : public NumericalError {
 public:
  PrecisionOverflow(std::int64_t row, std::int64_t col)
      : NumericalError("value at (" + std::to_string(row) + ", " + std::to_string(col) +
                       ") overflows single precision"),
        row_(row),
        col_(col) {}
  std::int64_t row() const noexcept { return row_; }
  std::int64_t col() const noexcept { return col_; }

 private:
  std::int64_t row_;
  std::int64_t col_;
};

/// Parameter-store failures (unknown key, bad value, missing/inconsistent setup).
class ParameterError : public Error {
 public:
  using Error::Error;
};

class UnknownParameter : public ParameterError {
 public:
  explicit UnknownParameter(const std::string& name)
      : ParameterError("unknown parameter '" + name + "'"), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class ValueOutOfDomain : public ParameterError {
 public:
  ValueOutOfDomain(const std::string& name, const std::string& value)
      : ParameterError("value '" + value + "' is not admissible for parameter '" + name + "'"),
        name_(name),
        value_(value) {}
  const std::string& name() const noexcept { return name_; }
  const std::string& value() const noexcept { return value_; }

 private:
  std::string name_;
  std::string value_;
};

class MissingRequired : public ParameterError {
 public:
  explicit MissingRequired(const std::string& name)
      : ParameterError("required parameter '" + name + "' is not set"), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class InconsistentParameters : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

/// Parameter or snapshot text could not be parsed; `line` is 1-based.
class ParseError : public ParameterError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : ParameterError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Handle used in the wrong lifecycle state (not set up, deallocated, ...).
class StateError : public Error {
 public:
  using Error::Error;
};

/// Autotuning protocol misuse or a snapshot that does not match the registry.
class AutotuneError : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

}  // namespace evp
