#pragma once

#include <stdexcept>
#include <string>

namespace evcharge {

/// Which parameter invariant a rejected configuration violated.
enum class ValidationCode {
  negative_rate,
  non_finite_rate,
  zero_rate,
  power_not_positive,
  power_exceeds_spaces,
  spaces_not_positive,
  bad_config,
};

const char* to_string(ValidationCode code) noexcept;

class ValidationError : public std::invalid_argument {
 public:
  ValidationError(ValidationCode code, const std::string& what)
      : std::invalid_argument(what), code_(code) {}
  ValidationCode code() const noexcept { return code_; }

 private:
  ValidationCode code_;
};

/// Input outside the mathematical domain of an operation (negative counts,
/// infinite K where a finite one is required, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when the requested feature does not exist for these inputs, e.g.
/// a generator for infinitely many parking spaces.
class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A numerical procedure finished but failed its accuracy check.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace evcharge
