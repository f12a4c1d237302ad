#pragma once

#include <stdexcept>
#include <string>

namespace econsim {

// Base class for all library failures; the CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input or state violates a documented invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// The two aggregation routes for total net assets disagree beyond tolerance.
// Signals an inconsistent state, not a numerical problem.
class AggregationMismatchError : public ValidationError {
 public:
  AggregationMismatchError(const std::string& what, double residual)
      : ValidationError(what), residual(residual) {}
  double residual = 0.0;
};

// A solve has no finite solution for the given inputs.
class DegenerateDenominatorError : public Error {
 public:
  using Error::Error;
};

// The price-level equation solved to a non-positive price; the exogenous
// real data are infeasible.
class NegativePriceError : public Error {
 public:
  NegativePriceError(const std::string& what, double price)
      : Error(what), price(price) {}
  double price = 0.0;
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, double last_residual)
      : Error(what), last_residual(last_residual) {}
  double last_residual = 0.0;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ZeroIncomeError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace econsim
