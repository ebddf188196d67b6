#pragma once

#include <span>

namespace latdeconv {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_stderr = 0.0;
  int points = 0;
};

/// Weighted least squares y ~ intercept + slope * x.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y,
                     std::span<const double> w = {});

/// Weighted mean of y - slope * x, i.e. the intercept with the slope held fixed.
double fixed_slope_intercept(std::span<const double> x, std::span<const double> y, double slope,
                             std::span<const double> w = {});

}  // namespace latdeconv
