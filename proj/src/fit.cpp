#include "fbmlab/fit.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fbmlab/errors.h"

namespace fbmlab {

RateFit fit_rate(const std::vector<RatePoint>& points) {
  if (points.size() < 3) throw FitError("rate fit needs at least 3 points, got " + std::to_string(points.size()));
  for (const RatePoint& p : points)
    if (!(p.value > 0.0) || !(p.n > 0.0) || !std::isfinite(p.value))
      throw FitError("rate fit needs positive finite values");

  const bool weighted = std::all_of(points.begin(), points.end(), [](const RatePoint& p) { return p.stderr_ > 0.0; });
  const std::size_t m = points.size();
  std::vector<double> x(m), y(m), w(m, 1.0);
  for (std::size_t i = 0; i < m; ++i) {
    x[i] = std::log2(points[i].n);
    y[i] = std::log2(points[i].value);
    if (weighted) {
      const double sigma = points[i].stderr_ / (points[i].value * std::numbers::ln2);
      w[i] = 1.0 / (sigma * sigma);
    }
  }
  double s = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    s += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
    sxx += w[i] * x[i] * x[i];
    sxy += w[i] * x[i] * y[i];
  }
  const double det = s * sxx - sx * sx;
  if (!(det > 0.0)) throw FitError("rate fit: abscissae are degenerate");

  RateFit fit;
  fit.slope = (s * sxy - sx * sy) / det;
  fit.intercept = (sxx * sy - sx * sxy) / det;
  double chi2 = 0.0, rss = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    fit.residuals.push_back(r);
    chi2 += w[i] * r * r;
    rss += r * r;
  }
  const double dof = static_cast<double>(m - 2);
  double se = 0.0;
  if (weighted) {
    se = std::sqrt(s / det) * std::sqrt(std::max(1.0, chi2 / dof));
  } else {
    se = std::sqrt(rss / dof * s / det);
  }
  fit.half_width = 2.0 * se;
  return fit;
}

}  // namespace fbmlab
