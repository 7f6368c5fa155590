// Error taxonomy. Everything thrown by covkit derives from covkit::Error and
// splits into two families: ValidationError for malformed inputs, documents or
// configs, and NumericError for requests that are well-formed but have no
// usable numerical answer (singular matrices, exhausted budgets, ...).
// The CLI maps the families to distinct exit codes.
#pragma once

#include <stdexcept>
#include <string>

namespace covkit {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// -- inputs that violate a documented precondition or schema -----------------

struct ValidationError : Error {
  using Error::Error;
};

struct ParseError : ValidationError {
  using ValidationError::ValidationError;
};

struct InvariantViolation : ValidationError {
  using ValidationError::ValidationError;
};

struct ConfigInvalid : ValidationError {
  using ValidationError::ValidationError;
};

struct UnsupportedKind : ValidationError {
  using ValidationError::ValidationError;
};

struct ModeMismatch : ValidationError {
  using ValidationError::ValidationError;
};

struct BinAbsent : ValidationError {
  using ValidationError::ValidationError;
};

struct InsufficientSamples : ValidationError {
  using ValidationError::ValidationError;
};

// -- well-formed requests with no trustworthy numerical answer ---------------

struct NumericError : Error {
  using Error::Error;
};

struct DegenerateParams : NumericError {
  using NumericError::NumericError;
};

struct SingularCM : NumericError {
  using NumericError::NumericError;
};

struct NotPositiveDefinite : NumericError {
  using NumericError::NumericError;
};

struct CorrelatedPairNotSupported : NumericError {
  using NumericError::NumericError;
};

struct GridTooCoarse : NumericError {
  using NumericError::NumericError;
};

struct BudgetExceeded : NumericError {
  using NumericError::NumericError;
};

}  // namespace covkit
