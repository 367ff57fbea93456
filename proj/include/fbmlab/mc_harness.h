#pragma once

// Monte Carlo experiments for the Riemann-sum error S_n and the sign-change
// local-time estimator: L² errors over replicates, log-log rate fits, reports.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fbmlab/fgn_engine.h"
#include "fbmlab/fit.h"
#include "fbmlab/path_integrals.h"

namespace fbmlab {

enum class ReferenceKind { fine_sign_change, fine_riemann };

std::string to_string(ReferenceKind k);
ReferenceKind reference_kind_from_string(const std::string& s);

inline constexpr std::int64_t kLocalTimeFineFactor = 16;
inline constexpr std::size_t kMaxReplicates = 10'000;

/// 100^{1/(2H-1)} rounded up to a power of two, capped at 256 and at least 16.
std::int64_t integral_fine_factor(HurstIndex h);

struct ExperimentPlan {
  std::vector<double> hurst{0.75};
  std::vector<std::int64_t> ns{64, 128, 256, 512, 1024, 2048};
  double t = 1.0;
  SignedMeasure integrand = SignedMeasure::indicator_above(0.0);
  ComponentPair pair{1, 1};
  std::size_t replicates = 200;           // first batch
  std::size_t max_replicates = kMaxReplicates;
  bool auto_scale = true;                 // grow until stderr <= 10% of l2_error
  std::uint64_t master_seed = 1;
  std::int64_t fine_factor = 0;           // 0: default for the experiment kind
  ReferenceKind reference = ReferenceKind::fine_sign_change;
  double level = 0.0;                     // local-time experiments only
  double budget = 4e10;                   // cap on max_replicates x fine path values
  unsigned threads = 1;

  /// Throws PlanError (or ScopeError for H <= 1/2) when the invariants fail.
  void validate() const;
};

struct RateCell {
  double hurst = 0.0;
  std::int64_t n = 0;
  double l2_error = 0.0;
  double stderr_ = 0.0;
  std::size_t replicates = 0;
  bool usable = true;  // stderr <= l2_error
};

struct HurstFit {
  double hurst = 0.0;
  bool fitted = false;      // false when fewer than 3 usable cells
  bool degenerate = false;  // every error identically zero
  RateFit fit;
  bool pass = false;        // slope <= -(1-H)/2 + 0.2
};

struct RateReport {
  std::vector<RateCell> cells;  // H-major, n increasing
  std::vector<HurstFit> fits;
};

/// S_n - δ_ij Σ c_k L̂(a_k) per replicate, from one fine path per replicate.
RateReport run_rate_experiment(const ExperimentPlan& plan);

/// 2 sign_change_error(a) at resolution n against the same estimator on the
/// 16x finer grid. Uses plan.level; the integrand and pair are ignored.
RateReport run_localtime_experiment(const ExperimentPlan& plan);

struct LevelDecay {
  RateCell low;   // level a_low
  RateCell high;  // level a_high
  bool pass = false;  // high.l2_error < low.l2_error
};

/// Local-time L² errors at two levels on the same replicates, one H and one n.
LevelDecay level_decay_check(const ExperimentPlan& plan, std::int64_t n, double a_low, double a_high);

struct MeanEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
};

/// Mean over paths of 2 sign_change_error(a) on the grid of resolution n over [0, t].
MeanEstimate localtime_mean(HurstIndex h, std::int64_t n, double t, double a, std::size_t paths,
                            std::uint64_t seed, unsigned threads);

struct AutocovarianceCheck {
  std::vector<double> empirical;  // lags 0..max_lag
  std::vector<double> exact;
  std::vector<double> z;          // (empirical - exact) / stderr
  bool pass = false;              // all |z| <= 4
};

/// Empirical fGn autocovariance of sample_fft increments (pooled over positions
/// of each path, then averaged over paths) against the closed form.
AutocovarianceCheck generator_autocovariance(HurstIndex h, std::int64_t n, std::size_t paths, int max_lag,
                                             std::uint64_t seed, unsigned threads);

/// CSV: H,n,l2_error,stderr,replicates,slope,half_width,pass
void write_rate_csv(const RateReport& report, std::ostream& out);

}  // namespace fbmlab
