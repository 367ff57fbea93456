#pragma once

// Covariance matrices of fBm increments and numerical certificates for the
// local non-determinism, determinant and inverse-entry estimates.

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "fbmlab/fgn_engine.h"

namespace fbmlab {

/// Increment B_{a1} - B_{a2}.
struct Window {
  double a1;
  double a2;
  double length() const noexcept { return a1 > a2 ? a1 - a2 : a2 - a1; }
};

class IncrementWindows {
public:
  /// Throws DomainError for negative times or, unless allow_degenerate, a1 == a2.
  explicit IncrementWindows(std::vector<Window> pairs, bool allow_degenerate = false);
  /// Windows (s_i, s_{i-1}) for an increasing sequence s_0 < s_1 < ... < s_m.
  static IncrementWindows consecutive(const std::vector<double>& s);
  /// Windows (s_{2i+1}, s_{2i}) for s_0 < s_1 <= s_2 < s_3 <= ...
  static IncrementWindows alternating(const std::vector<double>& s);

  const std::vector<Window>& pairs() const noexcept { return pairs_; }
  std::size_t size() const noexcept { return pairs_.size(); }
  /// True when the windows are [s_{i-1}, s_i] for 0 = s_0 < s_1 < ... (any orientation).
  bool is_consecutive_from_zero() const noexcept;
  /// True when the windows are ordered and pairwise disjoint (shared endpoints allowed).
  bool is_ordered_disjoint() const noexcept;

private:
  std::vector<Window> pairs_;
};

struct IncrementCovariance {
  IncrementWindows windows;
  HurstIndex hurst;
  Eigen::MatrixXd matrix;
};

IncrementCovariance build_increment_cov(const IncrementWindows& windows, HurstIndex h);

/// Small/large split of p+q consecutive increments. Indices are 1-based as
/// in increment k = B_{t_k} - B_{t_{k-1}}.
class IncrementPartition {
public:
  IncrementPartition(std::size_t total, std::vector<std::size_t> small_indices, double separation_ratio);

  std::size_t total() const noexcept { return total_; }
  std::size_t p() const noexcept { return small_.size(); }
  std::size_t q() const noexcept { return total_ - small_.size(); }
  const std::vector<std::size_t>& small() const noexcept { return small_; }
  /// Complement of the small set, increasing.
  std::vector<std::size_t> large() const;
  bool is_small(std::size_t k) const noexcept;
  double separation_ratio() const noexcept { return h_; }

  /// Throws DomainError unless times has total+1 increasing entries starting
  /// at 0 and every small increment is at most h times every large one.
  void validate(const std::vector<double>& times) const;

private:
  std::size_t total_;
  std::vector<std::size_t> small_;
  double h_;
};

struct NondeterminismCertificate {
  double l_hat = 0.0;      // min over trials of r(u)
  double r_max = 0.0;      // max over trials of r(u)
  std::size_t violations = 0;  // trials with r(u) > m
};

/// r(u) = u'Σu / Σ u_i^2 |Δ_i|^{2H} over unit-sphere u. Windows must be consecutive from 0.
NondeterminismCertificate check_local_nondeterminism(const IncrementCovariance& cov, std::size_t trials,
                                                     std::uint64_t rng_seed);

struct DeterminantSandwich {
  double det = 0.0;
  double lower_ratio = 0.0;  // det / Π|Δ|^{2H}
  double upper_ratio = 0.0;  // det / (m! Π|Δ|^{2H})
  bool violation = false;    // det <= 0 or upper_ratio > 1 + 1e-9
};

/// Windows must be ordered and disjoint.
DeterminantSandwich determinant_sandwich(const IncrementCovariance& cov);

struct EigenBracket {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  bool bracket_ok = false;    // lambda_min > 0 and lambda_max <= m max|Δ|^{2H}
  double lower_ratio = 0.0;   // lambda_min / min|Δ|^{2H}, logged only
};

/// Windows must be consecutive from 0.
EigenBracket eigenvalue_bracket(const IncrementCovariance& cov);

inline constexpr double kMaxCondition = 1e12;

struct FactorisationCheck {
  double theta1 = 0.0;
  std::vector<double> theta2;               // per small index, in partition order
  std::vector<std::vector<double>> theta3;  // p x p, diagonal unused (0)
  std::vector<std::vector<double>> theta4;  // q x q, 0 where both inverse entries vanish
  /// Item (e) scaled entries |Σ^{-1}_{ij}| max(|Δ_i||Δ_j|^{2H-1}, |Δ_i|^{2H-1}|Δ_j|) over i in J, j not in J.
  std::vector<double> cof_scaled;
  bool cof_bound_ok = false;  // all scaled entries finite
  double condition = 0.0;     // max of cond(Σ), cond(Σ')
};

/// times: t_0 = 0 < t_1 < ... < t_{p+q}. Throws ConditioningError when Σ or Σ'
/// has condition number above kMaxCondition.
FactorisationCheck decomp_factorisation_check(const std::vector<double>& times, const IncrementPartition& part,
                                              HurstIndex h);

/// min over unit-sphere x of x'Σ^{-1}x / Σ x_i^2/|Δ_i|^{2H}. Windows must be ordered and disjoint.
double quadratic_form_floor(const IncrementCovariance& cov, std::size_t trials, std::uint64_t rng_seed);

struct CovarianceBoundCheck {
  std::size_t trials = 0;
  std::size_t violations_unit = 0;   // |E| > t^{2H-1}|v-u| + 1e-12
  std::size_t violations_sharp = 0;  // |E| > H 2^{2-2H} t^{2H-1}|v-u| + 1e-12
  double max_ratio = 0.0;            // max |E| / (t^{2H-1}|v-u|)
};

/// Sharp constant in |E[(B_v-B_u)B_t]| <= c t^{2H-1}|v-u|, attained near u,v -> t/2.
double covariance_bound_constant(HurstIndex h);

/// Random t, u <= v uniform in [0,T].
CovarianceBoundCheck check_increment_covariance_bound(HurstIndex h, double horizon, std::size_t trials,
                                                      std::uint64_t rng_seed);

struct RandomConfigurationCheck {
  std::size_t configs = 0;
  std::size_t sandwich_violations = 0;  // determinant_sandwich violation
  std::size_t bracket_violations = 0;   // eigenvalue_bracket not ok
  double min_det_lower_ratio = 0.0;
  double max_det_upper_ratio = 0.0;
};

/// Consecutive increments from 0 at m in {2..6} sorted uniform times on (0, T];
/// configurations with a gap below 1e-6 T are redrawn.
RandomConfigurationCheck check_random_configurations(HurstIndex h, double horizon, std::size_t configs,
                                                     std::uint64_t rng_seed);

}  // namespace fbmlab
