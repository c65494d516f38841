#pragma once

#include <stdexcept>
#include <string>

namespace stabcert {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes of matrices/vectors do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside the documented domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Adaptive quadrature could not meet its own error estimate.
class QuadratureError : public Error {
 public:
  using Error::Error;
};

/// The shifted pair (A + mu I, B) has an uncontrollable unstable eigenvalue.
class UnstabilizableError : public Error {
 public:
  UnstabilizableError(const std::string& what, double re, double im)
      : Error(what), real_part_(re), imag_part_(im) {}
  double real_part() const noexcept { return real_part_; }
  double imag_part() const noexcept { return imag_part_; }

 private:
  double real_part_;
  double imag_part_;
};

/// A point-control eigenfunction vanishes at the actuator location.
class VanishingModeError : public Error {
 public:
  VanishingModeError(const std::string& what, int mode) : Error(what), mode_(mode) {}
  int mode() const noexcept { return mode_; }

 private:
  int mode_;
};

/// A finite-horizon steering problem could not be solved to the requested accuracy.
class SteeringError : public Error {
 public:
  using Error::Error;
};

}  // namespace stabcert
