#pragma once

#include <span>
#include <vector>

namespace fbmlab {

/// Solves T x = rhs for symmetric positive-definite Toeplitz T with first
/// column `column` (Levinson recursion, O(n^2) time, O(n) memory).
std::vector<double> solve_symmetric_toeplitz(std::span<const double> column, std::span<const double> rhs);

}  // namespace fbmlab
