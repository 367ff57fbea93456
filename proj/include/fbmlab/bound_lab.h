#pragma once

// Numerical checks of the small-increment decoupling estimate and of the
// Gaussian integral identities behind it.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "fbmlab/fgn_engine.h"
#include "fbmlab/gauss_cov.h"

namespace fbmlab {

/// Catalog of test functionals. Arguments are x_k = B_{t_k} - a.
///
/// step2_crossing  times (L, L+h, 2L+h), J = {2}. The ε -> 0 limit of
///   (1/2ε) 1{|x3| <= ε} |x2| 1{sgn x1 != sgn x2} 1{|x2| > ε}, i.e. the
///   density of B_{t3} at a times E[|x2| 1{sgn x1 != sgn x2} | x3 = 0].
///   Witness M = 1, G(x) = |x1 + x2|.
/// step1_indicator_product  times (L, L+h, 2L+h, 2L+2h), J = {2, 4}.
///   (1{x2 >= 0} - 1{x1 >= 0})(1{x4 >= 0} - 1{x3 >= 0}). Witness M = 1, G = 1.
/// prop13_crossing  times (L, L+h), J = {2}. |x2| 1{sgn x1 != sgn x2}.
///   Witness M = 1, G(x) = |x1 + x2|.
/// constant  F = 1 on the prop13 times. No witness; surrogate undefined.
/// zero  F = 0 on the prop13 times.
enum class Functional { step2_crossing, step1_indicator_product, prop13_crossing, constant, zero };

std::string to_string(Functional f);
/// Accepts the to_string names. Throws DomainError otherwise.
Functional functional_from_string(const std::string& name);

struct H1Witness {
  std::vector<std::size_t> small;  // J, 1-based increment indices
  double m = 1.0;
  std::string g;
};

/// Throws ScopeError for functionals without a witness.
H1Witness witness(Functional f);

struct DecouplingExperiment {
  Functional functional = Functional::step2_crossing;
  HurstIndex hurst{0.75};
  double h = 0.25;     // separation ratio: small increments have length h L
  double a = 0.0;      // level
  double base = 1.0;   // L
  std::size_t mc_samples = 1'000'000;
  std::uint64_t seed = 1;
  unsigned threads = 1;

  /// t_1 < ... < t_{p+q} (t_0 = 0 omitted).
  std::vector<double> times() const;
  IncrementPartition partition() const;
};

struct Estimate {
  double mean = 0.0;
  double stderr_ = 0.0;
};

/// d_{Σ'}(a, 0, ..., 0) / ((2π)^{q/2} sqrt(det Σ')), with Σ' the covariance of
/// the large increments after merging each small increment into its successor.
double surrogate_prefactor(const DecouplingExperiment& exp);

/// Prefactor times ∫ E[F(B̃(y))] dy; the y-integral is done in closed form,
/// the X expectation by Monte Carlo. With absolute, |F| replaces F.
/// Throws ScopeError for the constant functional.
Estimate surrogate_expectation(const DecouplingExperiment& exp, bool absolute = false);

/// E[F(B_{t_1} - a, ..., B_{t_{p+q}} - a)] by exact joint sampling. Requires mc_samples >= 1000.
Estimate true_expectation(const DecouplingExperiment& exp);

enum class VerdictStatus { pass, fail, inconclusive };
std::string to_string(VerdictStatus s);

struct ScalingRow {
  double h = 0.0;
  Estimate truth;
  Estimate surrogate;
  double surrogate_abs = 0.0;  // normalisation: surrogate of |F|
  double discrepancy = 0.0;    // |truth - surrogate|
  double discrepancy_se = 0.0;
  double relative = 0.0;       // discrepancy / surrogate_abs
  double relative_se = 0.0;
  bool significant = false;    // discrepancy > 2 discrepancy_se
};

struct ScalingReport {
  std::vector<ScalingRow> rows;  // in the order of the h grid
  double slope = 0.0;            // log2 relative discrepancy vs log2 h
  double half_width = 0.0;
  double target = 0.0;           // 2 - 2H
  VerdictStatus status = VerdictStatus::inconclusive;
  std::string reason;
};

/// Runs `base` at every h of the grid with common random numbers and fits the
/// relative discrepancy against h over the significant rows. PASS when the
/// slope is at least (2 - 2H) - 0.4. INCONCLUSIVE when the largest h is
/// underpowered (stderr >= 20% of its discrepancy) or fewer than 3 rows are
/// significant. The grid must be dyadic with at least 5 levels; H > 1/2.
ScalingReport decoupling_scaling(const DecouplingExperiment& base, const std::vector<double>& h_grid);

struct Theta1Scaling {
  std::vector<double> h;
  std::vector<double> theta1;  // |θ1| per h
  double slope = 0.0;          // log2 |θ1| vs log2 h
  double target = 0.0;         // 2 - 2H
  bool pass = false;           // |slope - target| <= 0.3
};

/// Determinant factorisation error of the step2 configuration (L, L+h, 2L+h), L = 1.
Theta1Scaling theta1_scaling(HurstIndex h, const std::vector<double>& h_grid);

struct EnvelopeCheck {
  double d_hat = 0.0;     // fitted decay in log|mean| = c - D a^2
  double log_c = 0.0;
  double envelope = 0.0;  // exp(c - D a_far^2)
  Estimate far;
  bool within = false;    // |far.mean| <= envelope + 3 far.stderr_
};

/// Fits D on a in {0, 0.5, 1} and checks the true expectation at a_far.
EnvelopeCheck envelope_check(const DecouplingExperiment& base, double a_far = 5.0);

/// E ∫ |y + X - α| 1{sgn(y + X - α) != sgn(y - α)} dy for X ~ N(0, θ²): θ²/2.
double lemma_a1_oracle(double theta);

/// Monte Carlo of the same integral: y uniform on the crossing interval.
Estimate lemma_a1_monte_carlo(double theta, std::size_t samples, std::uint64_t seed, double alpha = 0.0);

struct LemmaA2Result {
  Estimate lhs1;  // E ∫ |1{y > α} - 1{y + X2 > α}| dy
  Estimate lhs2;  // E ∫∫ |(1{y1 > α} - 1{y1 + X1 > α})(1{y1 + X1 + y2 > α} - 1{y1 + X1 + y2 + X2 > α})| dy2 dy1
  bool pass = false;
};

/// Both integrals by Monte Carlo over X and uniform y windows of half-width 8θ.
/// Requires samples >= 1e5.
LemmaA2Result lemma_a2_check(double theta1, double theta2, std::size_t samples, std::uint64_t seed,
                             double alpha = 0.0);

struct LemmaA3Point {
  std::int64_t n = 0;
  double value = 0.0;
};

struct LemmaA3Report {
  std::vector<LemmaA3Point> points;
  double slope = 0.0;  // log2 value vs log2 n
  bool pass = false;   // slope <= -(1 - H) + 0.3
};

/// ∫∫_C |φ_{u,v}(a,a) - φ_{u_n,v}(a,a)| du dv over C = {min(u, v, |u - v|) > 2/n} in
/// [0, T]^2, u_n = floor(n u)/n, by Gauss-Kronrod quadrature.
double lemma_a3_integral(HurstIndex h, double a, double horizon, std::int64_t n);
LemmaA3Report lemma_a3_decay(HurstIndex h, double a, double horizon, const std::vector<std::int64_t>& ns);

}  // namespace fbmlab
