#pragma once

#include <vector>

namespace fbmlab {

struct RatePoint {
  double n;       // abscissa (grid size, or separation ratio h)
  double value;   // > 0
  double stderr_; // standard error of value, >= 0
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;  // log2 scale
  double half_width = 0.0; // 2 x slope standard error
  std::vector<double> residuals;  // log2 residuals, input order
};

/// Least squares of log2(value) on log2(n). With all stderr > 0 the points are
/// weighted by 1/σ², σ = stderr/(value ln 2), and the slope error is inflated by
/// sqrt(max(1, reduced χ²)); otherwise an unweighted fit with residual-based error.
/// Throws FitError with fewer than 3 points or a non-positive value.
RateFit fit_rate(const std::vector<RatePoint>& points);

}  // namespace fbmlab
