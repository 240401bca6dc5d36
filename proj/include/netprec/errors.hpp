#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace netprec {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Invalid shapes, indices, options, or unreadable input. A CLI maps these to
// exit code 2.
class ValidationError : public Error {
public:
  using Error::Error;
};

// Estimation failed on numerically degenerate data. A CLI maps these to
// exit code 3.
class NumericalError : public Error {
public:
  using Error::Error;
};

struct DimensionMismatch : ValidationError { using ValidationError::ValidationError; };
struct NonFiniteEntry : ValidationError { using ValidationError::ValidationError; };
struct NotSquare : ValidationError { using ValidationError::ValidationError; };
struct NotBinary : ValidationError { using ValidationError::ValidationError; };
struct NotSymmetric : ValidationError { using ValidationError::ValidationError; };
struct EmptyMatrix : ValidationError { using ValidationError::ValidationError; };
struct IndexOutOfRange : ValidationError { using ValidationError::ValidationError; };
struct TooFewRows : ValidationError { using ValidationError::ValidationError; };
struct NonPositive : ValidationError { using ValidationError::ValidationError; };
struct InvalidLevel : ValidationError { using ValidationError::ValidationError; };
struct InvalidSize : ValidationError { using ValidationError::ValidationError; };
struct LengthMismatch : ValidationError { using ValidationError::ValidationError; };
struct ZeroTrueComponent : ValidationError { using ValidationError::ValidationError; };
struct ConfigError : ValidationError { using ValidationError::ValidationError; };

struct NotPositiveDefinite : NumericalError { using NumericalError::NumericalError; };
struct DegenerateResidual : NumericalError { using NumericalError::NumericalError; };
struct AllFoldsDegenerate : NumericalError { using NumericalError::NumericalError; };

// The sample covariance restricted to a column's support failed to factor,
// typically because the support size reaches the sample size.
class SubmatrixNotPD : public NumericalError {
public:
  SubmatrixNotPD(std::size_t column, const std::string& what)
      : NumericalError(what), column_(column) {}
  std::size_t column() const { return column_; }

private:
  std::size_t column_;
};

// A data column has no variation, so it cannot be scaled to unit variance.
class ZeroVarianceColumn : public NumericalError {
public:
  ZeroVarianceColumn(std::size_t column, const std::string& what)
      : NumericalError(what), column_(column) {}
  std::size_t column() const { return column_; }

private:
  std::size_t column_;
};

// Unreadable or malformed input file; the message names file and line.
class IoError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

}  // namespace netprec
