#pragma once

#include <stdexcept>
#include <string>

namespace mixedness {

/// Malformed input: wrong shape, broken symmetry, out-of-range parameter.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input is well formed but outside the mathematical domain of the operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The mode integral diverges at small wavenumber for this profile/field pair.
class IrDivergenceError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// The mode integral diverges at large wavenumber unless an explicit cutoff is set.
class UvDivergenceError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A quadrature failed to reach the requested tolerance.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double achieved)
      : std::runtime_error(what + " (achieved relative tolerance " + std::to_string(achieved) + ")"),
        achieved_(achieved) {}

  double achieved_tolerance() const noexcept { return achieved_; }

 private:
  double achieved_;
};

}  // namespace mixedness
