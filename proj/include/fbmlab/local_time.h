#pragma once

// Local time L_t(a) of an fBm path: occupation binning, the sign-change
// estimator, and quadrature values of E[L_t(a)] and E[L_t(a)^2].

#include <cstdint>
#include <string>
#include <vector>

#include "fbmlab/fgn_engine.h"
#include "fbmlab/path_integrals.h"

namespace fbmlab {

enum class EstimatorKind { binning, sign_change };

std::string to_string(EstimatorKind kind);

struct LocalTimeProfile {
  std::vector<double> levels;  // increasing
  std::vector<double> estimates;
  EstimatorKind kind = EstimatorKind::binning;
  double resolution = 0.0;  // eps for binning, n for sign change
  double t = 0.0;
  HurstIndex hurst{0.5};

  /// Linear interpolation between levels. Throws CoverageError outside [levels.front(), levels.back()].
  double at(double a) const;
};

struct BinningEstimate {
  double value = 0.0;
  /// False when eps < 4 Δt^H: bins narrower than a typical grid increment.
  bool resolved = true;
};

/// Default binning half-width for grid spacing 1/n: 4 n^{-H}.
double default_eps(HurstIndex h, std::int64_t n);

/// (1/2ε) ∫_0^t 1{|B_s - a| <= ε} ds with the left-point rule on the path grid.
BinningEstimate binning_estimator(const FbmPath& path, double a, double eps, double t, int component = 1);

/// 2 sign_change_error(path, a, grid). Requires H > 1/2 and t == grid.t_end().
double sign_change_estimator(const FbmPath& path, double a, const GridSpec& grid, double t, int component = 1);

/// Exact E[2 sign_change_error(0)] on the grid k/n, k <= n t, with t n an integer:
/// 2 n^{2H-1} Σ_k σ_{k+1}(1 - ρ_k)/sqrt(2π) for (B_{k/n}, B_{(k+1)/n}).
double sign_change_expectation(HurstIndex h, std::int64_t n, double t);

/// E[L_t(a)^p] for p in {1, 2} by adaptive Gauss-Kronrod quadrature, relative tolerance 1e-6.
double moment_oracle(HurstIndex h, double t, double a, int p);

/// The two ordered-simplex halves of E[L_t(a)^2], {u < v} and {v < u}, each
/// integrated in the opposite iterated order. Equal by symmetry.
struct SecondMomentHalves {
  double lower = 0.0;
  double upper = 0.0;
};
SecondMomentHalves second_moment_halves(HurstIndex h, double t, double a);

/// Density of (B_u, B_v) at (a, a), u, v > 0, u != v.
double pair_density(HurstIndex h, double u, double v, double a);

/// Σ_k c_k L̂(a_k) read off the profile.
double limit_functional(const LocalTimeProfile& profile, const SignedMeasure& mu);

/// Σ_k c_k L̂(a_k) with each atom estimated by the sign-change estimator on `grid`.
double limit_functional(const FbmPath& path, const GridSpec& grid, const SignedMeasure& mu, int component = 1);

LocalTimeProfile binning_profile(const FbmPath& path, const std::vector<double>& levels, double eps, double t,
                                 int component = 1);
LocalTimeProfile sign_change_profile(const FbmPath& path, const std::vector<double>& levels, const GridSpec& grid,
                                     int component = 1);

}  // namespace fbmlab
