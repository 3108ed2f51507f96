// errors.hpp - exception hierarchy shared by all transduce modules

#pragma once

#include <stdexcept>
#include <string>

namespace transduce {

// Bad user input (config files, CLI arguments). Maps to exit code 2.
class ConfigInvalid : public std::runtime_error {
 public:
  ConfigInvalid(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Base for failures of the numerics themselves. Maps to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class StepSizeUnderflow : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegenerateKernel : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class FitDiverged : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class CutoffNotConverged : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DivisionByZeroAbsorption : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace transduce
