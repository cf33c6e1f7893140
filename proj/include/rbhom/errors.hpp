#pragma once

#include <stdexcept>
#include <string>

namespace rbhom {

/// Invalid input: bad parameter, bad mesh size, malformed configuration.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A linear solve failed to meet its residual contract.
class SolveError : public std::runtime_error {
 public:
  SolveError(const std::string& what, double residual)
      : std::runtime_error(what + " (relative residual " + std::to_string(residual) + ")"),
        detail_(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }
  /// Message without the residual suffix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string detail_;
  double residual_;
};

/// A certified error bound was found smaller than the measured error.
class BoundViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Basis container could not be read or does not match the system.
class BasisFileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rbhom
