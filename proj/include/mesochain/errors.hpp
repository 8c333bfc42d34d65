#pragma once

#include <stdexcept>
#include <string>

namespace mesochain {

/// Argument outside the mathematical domain of an operation (coincident
/// particles, non-positive separations, bad kernel parameters).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed or inconsistent scenario configuration. Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failure of a numerical procedure (integrator, reconstruction, solver).
/// Maps to CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Particles jumped over each other or coincided during a time step.
class OrderingError : public NumericalError {
 public:
  OrderingError(const std::string& what, std::size_t index)
      : NumericalError(what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

}  // namespace mesochain
