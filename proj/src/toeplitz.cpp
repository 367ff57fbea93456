#include "fbmlab/toeplitz.h"

#include <cstddef>

#include "fbmlab/errors.h"

namespace fbmlab {

// Golub & Van Loan, Algorithm 4.7.2, on the matrix normalised to unit diagonal.
std::vector<double> solve_symmetric_toeplitz(std::span<const double> column, std::span<const double> rhs) {
  const std::size_t n = rhs.size();
  if (column.size() < n) throw DomainError("toeplitz: first column shorter than right-hand side");
  if (n == 0) return {};
  const double r0 = column[0];
  if (!(r0 > 0.0)) throw NumericalError("toeplitz: non-positive diagonal");

  std::vector<double> r(n);
  for (std::size_t i = 1; i < n; ++i) r[i - 1] = column[i] / r0;
  std::vector<double> b(rhs.begin(), rhs.end());
  for (double& v : b) v /= r0;

  std::vector<double> x(n), y(n), tmp(n);
  x[0] = b[0];
  if (n == 1) return x;
  y[0] = -r[0];
  double beta = 1.0;
  double alpha = -r[0];
  for (std::size_t k = 1; k < n; ++k) {
    beta *= (1.0 - alpha * alpha);
    if (!(beta > 0.0)) throw NumericalError("toeplitz: matrix is not positive definite");
    double dot = 0.0;
    for (std::size_t i = 0; i < k; ++i) dot += r[i] * x[k - 1 - i];
    const double mu = (b[k] - dot) / beta;
    for (std::size_t i = 0; i < k; ++i) tmp[i] = x[i] + mu * y[k - 1 - i];
    for (std::size_t i = 0; i < k; ++i) x[i] = tmp[i];
    x[k] = mu;
    if (k + 1 < n) {
      double dy = 0.0;
      for (std::size_t i = 0; i < k; ++i) dy += r[i] * y[k - 1 - i];
      alpha = (-r[k] - dy) / beta;
      for (std::size_t i = 0; i < k; ++i) tmp[i] = y[i] + alpha * y[k - 1 - i];
      for (std::size_t i = 0; i < k; ++i) y[i] = tmp[i];
      y[k] = alpha;
    }
  }
  return x;
}

}  // namespace fbmlab
