#pragma once

#include <cstddef>
#include <span>

#include "econsim/errors.hpp"

namespace econsim {

// Simple linear regression y = intercept + slope * x with classical
// standard errors.
struct OlsFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double intercept_se = 0.0;
  double slope_t = 0.0;
  double intercept_t = 0.0;
  double r_squared = 0.0;
  double f_stat = 0.0;
  double correlation = 0.0;
  std::size_t n = 0;
};

// Throws InsufficientDataError (< 3 points) or ValidationError (zero
// variance in x).
OlsFit ols(std::span<const double> x, std::span<const double> y);

}  // namespace econsim
