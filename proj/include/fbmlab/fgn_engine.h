#pragma once

// Exact-in-law sampling of one- and two-dimensional fractional Brownian
// motion on uniform grids: Cholesky on arbitrary node sets, circulant
// embedding of fractional Gaussian noise for long grids.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "fbmlab/rng.h"

namespace fbmlab {

/// Hurst index H in (0,1). Generation accepts any such H; theorem-facing
/// features call require_theorem_scope() at their point of use.
class HurstIndex {
public:
  explicit HurstIndex(double value);

  double value() const noexcept { return value_; }
  /// Throws ScopeError unless H > 1/2.
  void require_theorem_scope(std::string_view feature) const;

  friend bool operator==(HurstIndex, HurstIndex) = default;

private:
  double value_;
};

/// Uniform grid k/n, k = 0..floor(n t_end), plus t_end itself when n t_end is
/// not an integer, so B_{(k+1)/n ^ t} is always a node.
class GridSpec {
public:
  GridSpec(double horizon, std::int64_t points_per_unit, double t_end);
  /// Shorthand for horizon = t_end.
  GridSpec(std::int64_t points_per_unit, double t_end) : GridSpec(t_end, points_per_unit, t_end) {}

  double horizon() const noexcept { return horizon_; }
  std::int64_t points_per_unit() const noexcept { return n_; }
  double t_end() const noexcept { return t_end_; }

  /// floor(n t_end): number of full steps of length 1/n.
  std::int64_t full_steps() const noexcept { return full_steps_; }
  bool has_partial_step() const noexcept { return partial_; }
  std::size_t node_count() const noexcept { return static_cast<std::size_t>(full_steps_) + 1 + (partial_ ? 1 : 0); }
  double node(std::size_t k) const noexcept;
  std::vector<double> nodes() const;
  double step() const noexcept { return 1.0 / static_cast<double>(n_); }

  /// Same horizon and t_end, factor times more points per unit.
  GridSpec refine(std::int64_t factor) const;
  /// Index of coarse node k/n inside this grid, when this grid refines `coarse`.
  /// Throws AlignmentError if the coarse nodes are not all present.
  std::int64_t refinement_factor_over(const GridSpec& coarse) const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

private:
  double horizon_;
  std::int64_t n_;
  double t_end_;
  std::int64_t full_steps_;
  bool partial_;
};

/// Sampled path of one or two independent fBm components; values[c][k] is
/// component c at grid node k, values[c][0] = 0.
struct FbmPath {
  HurstIndex hurst;
  GridSpec grid;
  std::vector<std::vector<double>> values;

  int components() const noexcept { return static_cast<int>(values.size()); }
  std::span<const double> component(int c) const { return values.at(static_cast<std::size_t>(c)); }
};

/// E[B_s B_t] = (t^{2H} + s^{2H} - |t-s|^{2H}) / 2. Throws DomainError for negative times.
double fbm_covariance(HurstIndex h, double s, double t);

/// Autocovariance of unit-step fractional Gaussian noise at integer lag k.
double fgn_autocovariance(HurstIndex h, std::int64_t lag);

/// E[(B_{a1}-B_{a2})(B_{b1}-B_{b2})] written through |.|^{2H} differences only,
/// which avoids the cancellation of the four-covariance expansion far from 0.
double increment_covariance(HurstIndex h, double a1, double a2, double b1, double b2);

/// Multivariate normal sampler from a fixed covariance (Cholesky, one jitter retry).
class GaussianSampler {
public:
  GaussianSampler(Eigen::MatrixXd covariance, Eigen::VectorXd mean);
  explicit GaussianSampler(Eigen::MatrixXd covariance);

  std::size_t dimension() const noexcept { return static_cast<std::size_t>(mean_.size()); }
  void draw(NormalStream& normals, std::span<double> out) const;
  const Eigen::MatrixXd& factor() const noexcept { return lower_; }

private:
  Eigen::MatrixXd lower_;
  Eigen::VectorXd mean_;
};

inline constexpr std::size_t kDefaultExactNodeCap = 4096;

/// fBm values on an arbitrary increasing node set with times > 0 (B_0 = 0 is implied).
class ExactSampler {
public:
  ExactSampler(HurstIndex h, std::vector<double> times, std::size_t node_cap = kDefaultExactNodeCap);

  const std::vector<double>& times() const noexcept { return times_; }
  /// out.size() == times().size(); out[i] = B at times()[i].
  void draw(NormalStream& normals, std::span<double> out) const;

private:
  std::vector<double> times_;
  std::unique_ptr<GaussianSampler> sampler_;
};

/// Circulant-embedding fGn sampler for one grid. Construction does the
/// spectral work once; draws cost one FFT of the embedding length.
class FftSampler {
public:
  FftSampler(HurstIndex h, GridSpec grid);
  ~FftSampler();
  FftSampler(FftSampler&&) noexcept;
  FftSampler& operator=(FftSampler&&) noexcept;

  const GridSpec& grid() const noexcept { return grid_; }
  std::size_t embedding_size() const noexcept { return sqrt_eigen_.size(); }
  /// Negative eigenvalues beyond -1e-9 * max that were clamped to zero.
  std::size_t clamped_count() const noexcept { return clamped_; }

  /// out.size() == grid().node_count(); out[0] = 0.
  void draw(NormalStream& normals, std::span<double> out) const;

private:
  HurstIndex hurst_;
  GridSpec grid_;
  std::vector<double> sqrt_eigen_;
  std::size_t clamped_ = 0;
  // Terminal partial node: conditional regression weights on the full-step
  // increments and the conditional standard deviation.
  std::vector<double> tail_weights_;
  double tail_sd_ = 0.0;
  double tail_length_ = 0.0;
};

/// Components use streams (seed, replicate 0, component c).
FbmPath sample_exact(HurstIndex h, const GridSpec& grid, std::uint64_t seed, int components,
                     std::size_t node_cap = kDefaultExactNodeCap);
FbmPath sample_fft(HurstIndex h, const GridSpec& grid, std::uint64_t seed, int components);
/// Replicate-aware variant: component c uses base.with_component(c).
FbmPath sample_fft(const FftSampler& sampler, HurstIndex h, StreamKey base, int components);

/// CSV with header `t,B1[,B2]`, 17 significant digits.
void write_path_csv(const FbmPath& path, std::ostream& out);

}  // namespace fbmlab
