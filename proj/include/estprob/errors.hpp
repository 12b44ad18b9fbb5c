#pragma once

#include <stdexcept>
#include <string>

namespace estprob {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed or unusable input data (CSV rows, p statements, group sizes).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input that is well formed but collapses the model, e.g. zero variance.
class DegenerateInputError : public InputError {
 public:
  using InputError::InputError;
};

/// An iterative method failed to converge within its iteration cap.
class NumericFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace estprob
