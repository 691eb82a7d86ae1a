#pragma once

#include <stdexcept>
#include <string>

namespace twocopy {

/// Root of every error thrown by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidDimensionError : public Error {
 public:
  using Error::Error;
};

/// Operand shapes do not fit together (or an operator lacks a required
/// structural property such as Hermiticity).
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A scalar parameter lies outside its mathematical domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

class BracketError : public Error {
 public:
  using Error::Error;
};

/// The estimation formula has a vanishing denominator for this probe.
class SingularConfigurationError : public Error {
 public:
  using Error::Error;
};

class StateValidityError : public Error {
 public:
  using Error::Error;
};

class InconsistentDataError : public Error {
 public:
  using Error::Error;
};

class UnsupportedDimensionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input outside an open interval. `boundary()` tells whether the input sat
/// exactly on an edge whose limit is meaningful (e.g. an infinite rate).
class OutOfRangeError : public Error {
 public:
  enum class Boundary { kNone, kLower, kUpper };

  OutOfRangeError(const std::string& what, Boundary boundary)
      : Error(what), boundary_(boundary) {}

  Boundary boundary() const noexcept { return boundary_; }

 private:
  Boundary boundary_;
};

}  // namespace twocopy
