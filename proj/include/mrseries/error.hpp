#pragma once

#include <stdexcept>
#include <string>

namespace mrseries {

/// Base of every library error. The CLI maps NumericalError to its own exit
/// status and every other Error to the validation status.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class RangeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class IndexError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class SizeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ContractViolation : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InsufficientData : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class UnsupportedConfiguration : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DegenerateFit : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class IoError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace mrseries
