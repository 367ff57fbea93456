#include "fbmlab/fgn_engine.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <ostream>
#include <string>

#include <fftw3.h>

#include "fbmlab/errors.h"
#include "fbmlab/io.h"
#include "fbmlab/toeplitz.h"

namespace fbmlab {

HurstIndex::HurstIndex(double value) : value_(value) {
  if (!(value > 0.0 && value < 1.0)) throw DomainError("Hurst index must lie in (0,1), got " + std::to_string(value));
}

void HurstIndex::require_theorem_scope(std::string_view feature) const {
  if (!(value_ > 0.5))
    throw ScopeError(std::string(feature) + " requires H > 1/2, got H = " + std::to_string(value_));
}

// ---------------------------------------------------------------------------
// GridSpec

GridSpec::GridSpec(double horizon, std::int64_t points_per_unit, double t_end)
    : horizon_(horizon), n_(points_per_unit), t_end_(t_end) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("grid horizon must be > 0");
  if (points_per_unit < 1) throw DomainError("points per unit must be >= 1");
  if (!(t_end > 0.0) || t_end > horizon * (1.0 + 1e-12)) throw DomainError("grid t_end must lie in (0, horizon]");
  const double scaled = static_cast<double>(n_) * t_end_;
  const double nearest = std::round(scaled);
  if (std::abs(scaled - nearest) <= 1e-9 * std::max(1.0, scaled)) {
    full_steps_ = static_cast<std::int64_t>(nearest);
    partial_ = false;
  } else {
    full_steps_ = static_cast<std::int64_t>(std::floor(scaled));
    partial_ = true;
  }
}

double GridSpec::node(std::size_t k) const noexcept {
  if (static_cast<std::int64_t>(k) <= full_steps_) {
    if (!partial_ && static_cast<std::int64_t>(k) == full_steps_) return t_end_;
    return static_cast<double>(k) / static_cast<double>(n_);
  }
  return t_end_;
}

std::vector<double> GridSpec::nodes() const {
  std::vector<double> out(node_count());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = node(k);
  return out;
}

GridSpec GridSpec::refine(std::int64_t factor) const {
  if (factor < 1) throw DomainError("refinement factor must be >= 1");
  return GridSpec(horizon_, n_ * factor, t_end_);
}

std::int64_t GridSpec::refinement_factor_over(const GridSpec& coarse) const {
  if (n_ % coarse.n_ != 0)
    throw AlignmentError("grid with n = " + std::to_string(n_) + " does not contain the nodes k/" +
                         std::to_string(coarse.n_));
  if (std::abs(t_end_ - coarse.t_end_) > 1e-12 * std::max(1.0, t_end_))
    throw AlignmentError("grids end at different times");
  return n_ / coarse.n_;
}

// ---------------------------------------------------------------------------
// Covariances

double fbm_covariance(HurstIndex h, double s, double t) {
  if (s < 0.0 || t < 0.0) throw DomainError("fbm_covariance: times must be non-negative");
  const double e = 2.0 * h.value();
  return 0.5 * (std::pow(t, e) + std::pow(s, e) - std::pow(std::abs(t - s), e));
}

double fgn_autocovariance(HurstIndex h, std::int64_t lag) {
  const double k = std::abs(static_cast<double>(lag));
  const double e = 2.0 * h.value();
  return 0.5 * (std::pow(k + 1.0, e) - 2.0 * std::pow(k, e) + std::pow(std::abs(k - 1.0), e));
}

double increment_covariance(HurstIndex h, double a1, double a2, double b1, double b2) {
  const double e = 2.0 * h.value();
  auto p = [e](double x) { return std::pow(std::abs(x), e); };
  return 0.5 * (p(a1 - b2) + p(a2 - b1) - p(a1 - b1) - p(a2 - b2));
}

// ---------------------------------------------------------------------------
// Dense samplers

GaussianSampler::GaussianSampler(Eigen::MatrixXd covariance, Eigen::VectorXd mean) : mean_(std::move(mean)) {
  if (covariance.rows() != covariance.cols() || covariance.rows() != mean_.size())
    throw DomainError("GaussianSampler: covariance/mean shape mismatch");
  Eigen::LLT<Eigen::MatrixXd> llt(covariance);
  if (llt.info() != Eigen::Success) {
    covariance.diagonal().array() += 1e-12;
    llt.compute(covariance);
    if (llt.info() != Eigen::Success)
      throw NumericalError("Cholesky factorisation failed after jitter; covariance is not positive definite");
  }
  lower_ = llt.matrixL();
}

GaussianSampler::GaussianSampler(Eigen::MatrixXd covariance)
    : GaussianSampler(covariance, Eigen::VectorXd::Zero(covariance.rows())) {}

void GaussianSampler::draw(NormalStream& normals, std::span<double> out) const {
  const auto m = static_cast<Eigen::Index>(dimension());
  if (static_cast<Eigen::Index>(out.size()) != m) throw DomainError("GaussianSampler: output size mismatch");
  Eigen::VectorXd z(m);
  for (Eigen::Index i = 0; i < m; ++i) z[i] = normals.next();
  Eigen::Map<Eigen::VectorXd> x(out.data(), m);
  x.noalias() = lower_.triangularView<Eigen::Lower>() * z;
  x += mean_;
}

ExactSampler::ExactSampler(HurstIndex h, std::vector<double> times, std::size_t node_cap) : times_(std::move(times)) {
  if (times_.size() > node_cap)
    throw SizeError("exact sampler: " + std::to_string(times_.size()) + " nodes exceed the cap of " +
                    std::to_string(node_cap));
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (!(times_[i] > 0.0)) throw DomainError("exact sampler: node times must be > 0");
    if (i > 0 && !(times_[i] > times_[i - 1])) throw DomainError("exact sampler: node times must increase");
  }
  const auto m = static_cast<Eigen::Index>(times_.size());
  Eigen::MatrixXd cov(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j <= i; ++j)
      cov(i, j) = cov(j, i) = fbm_covariance(h, times_[static_cast<std::size_t>(i)], times_[static_cast<std::size_t>(j)]);
  sampler_ = std::make_unique<GaussianSampler>(std::move(cov));
}

void ExactSampler::draw(NormalStream& normals, std::span<double> out) const { sampler_->draw(normals, out); }

// ---------------------------------------------------------------------------
// FFT plumbing

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  fftw_complex* data = nullptr;
  std::size_t size = 0;
  FftwBuffer() = default;
  explicit FftwBuffer(std::size_t n) : data(fftw_alloc_complex(n)), size(n) {
    if (data == nullptr) throw SizeError("fftw allocation of " + std::to_string(n) + " failed");
  }
  ~FftwBuffer() {
    if (data != nullptr) fftw_free(data);
  }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  FftwBuffer(FftwBuffer&& o) noexcept : data(std::exchange(o.data, nullptr)), size(std::exchange(o.size, 0)) {}
  FftwBuffer& operator=(FftwBuffer&& o) noexcept {
    std::swap(data, o.data);
    std::swap(size, o.size);
    return *this;
  }
};

// Forward plans are created once per size under the planner lock (FFTW's
// planner is not thread safe) and executed through the new-array interface.
fftw_plan forward_plan(std::size_t n) {
  static std::map<std::size_t, fftw_plan> plans;
  std::lock_guard lock(planner_mutex());
  auto it = plans.find(n);
  if (it != plans.end()) return it->second;
  FftwBuffer in(n), out(n);
  fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), in.data, out.data, FFTW_FORWARD, FFTW_ESTIMATE);
  if (p == nullptr) throw NumericalError("fftw planning failed for size " + std::to_string(n));
  plans.emplace(n, p);
  return p;
}

struct Workspace {
  FftwBuffer in, out;
};

Workspace& workspace(std::size_t n) {
  thread_local std::map<std::size_t, Workspace> spaces;
  auto it = spaces.find(n);
  if (it == spaces.end()) it = spaces.emplace(n, Workspace{FftwBuffer(n), FftwBuffer(n)}).first;
  return it->second;
}

std::size_t next_power_of_two(std::size_t x) {
  std::size_t p = 1;
  while (p < x) p <<= 1;
  return p;
}

}  // namespace

FftSampler::FftSampler(HurstIndex h, GridSpec grid) : hurst_(h), grid_(grid) {
  const auto steps = static_cast<std::size_t>(grid_.full_steps());
  if (steps > 0) {
    const std::size_t len = next_power_of_two(std::max<std::size_t>(2, 2 * steps));
    const std::size_t half = len / 2;
    Workspace& ws = workspace(len);
    for (std::size_t j = 0; j < len; ++j) {
      const std::size_t lag = j <= half ? j : len - j;
      ws.in.data[j][0] = fgn_autocovariance(h, static_cast<std::int64_t>(lag));
      ws.in.data[j][1] = 0.0;
    }
    fftw_execute_dft(forward_plan(len), ws.in.data, ws.out.data);

    double max_eig = 0.0, total = 0.0, negative = 0.0;
    for (std::size_t k = 0; k < len; ++k) {
      const double lam = ws.out.data[k][0];
      max_eig = std::max(max_eig, lam);
      total += std::abs(lam);
      if (lam < 0.0) negative += -lam;
    }
    sqrt_eigen_.resize(len);
    for (std::size_t k = 0; k < len; ++k) {
      double lam = ws.out.data[k][0];
      if (lam < 0.0) {
        if (lam < -1e-9 * max_eig) ++clamped_;
        lam = 0.0;
      }
      sqrt_eigen_[k] = std::sqrt(lam / static_cast<double>(len));
    }
    if (negative > 1e-6 * total)
      throw EmbeddingError("circulant embedding: negative spectral mass " + std::to_string(negative / total) +
                           " exceeds 1e-6 of the spectrum");
  }

  if (grid_.has_partial_step()) {
    const double dt = grid_.step();
    const double start = static_cast<double>(steps) * dt;
    tail_length_ = grid_.t_end() - start;
    std::vector<double> column(steps), cross(steps);
    for (std::size_t i = 0; i < steps; ++i) {
      column[i] = fgn_autocovariance(h, static_cast<std::int64_t>(i));
      cross[i] = increment_covariance(h, grid_.t_end(), start, static_cast<double>(i + 1) * dt,
                                      static_cast<double>(i) * dt);
    }
    const double scale = std::pow(dt, 2.0 * h.value());
    tail_weights_ = solve_symmetric_toeplitz(column, cross);
    double explained = 0.0;
    for (std::size_t i = 0; i < steps; ++i) {
      tail_weights_[i] /= scale;
      explained += tail_weights_[i] * cross[i];
    }
    const double var = std::pow(tail_length_, 2.0 * h.value()) - explained;
    tail_sd_ = std::sqrt(std::max(var, 0.0));
  }
}

FftSampler::~FftSampler() = default;
FftSampler::FftSampler(FftSampler&&) noexcept = default;
FftSampler& FftSampler::operator=(FftSampler&&) noexcept = default;

void FftSampler::draw(NormalStream& normals, std::span<double> out) const {
  if (out.size() != grid_.node_count()) throw DomainError("FftSampler: output size mismatch");
  const auto steps = static_cast<std::size_t>(grid_.full_steps());
  out[0] = 0.0;
  if (steps > 0) {
    const std::size_t len = sqrt_eigen_.size();
    Workspace& ws = workspace(len);
    for (std::size_t k = 0; k < len; ++k) {
      const double re = normals.next();
      const double im = normals.next();
      ws.in.data[k][0] = sqrt_eigen_[k] * re;
      ws.in.data[k][1] = sqrt_eigen_[k] * im;
    }
    fftw_execute_dft(forward_plan(len), ws.in.data, ws.out.data);
    const double scale = std::pow(grid_.step(), hurst_.value());
    double level = 0.0;
    for (std::size_t j = 0; j < steps; ++j) {
      level += scale * ws.out.data[j][0];
      out[j + 1] = level;
    }
  }
  if (grid_.has_partial_step()) {
    double mean = 0.0;
    for (std::size_t i = 0; i < steps; ++i) mean += tail_weights_[i] * (out[i + 1] - out[i]);
    out[steps + 1] = out[steps] + mean + tail_sd_ * normals.next();
  }
}

// ---------------------------------------------------------------------------

FbmPath sample_exact(HurstIndex h, const GridSpec& grid, std::uint64_t seed, int components, std::size_t node_cap) {
  if (components != 1 && components != 2) throw DomainError("components must be 1 or 2");
  const auto nodes = grid.nodes();
  const ExactSampler sampler(h, std::vector<double>(nodes.begin() + 1, nodes.end()), node_cap);
  FbmPath path{h, grid, {}};
  for (int c = 0; c < components; ++c) {
    std::vector<double> values(nodes.size(), 0.0);
    NormalStream normals(StreamKey{seed, 0, static_cast<std::uint32_t>(c)});
    sampler.draw(normals, std::span<double>(values).subspan(1));
    path.values.push_back(std::move(values));
  }
  return path;
}

FbmPath sample_fft(const FftSampler& sampler, HurstIndex h, StreamKey base, int components) {
  if (components != 1 && components != 2) throw DomainError("components must be 1 or 2");
  FbmPath path{h, sampler.grid(), {}};
  for (int c = 0; c < components; ++c) {
    std::vector<double> values(sampler.grid().node_count());
    NormalStream normals(base.with_component(static_cast<std::uint32_t>(c)));
    sampler.draw(normals, values);
    path.values.push_back(std::move(values));
  }
  return path;
}

FbmPath sample_fft(HurstIndex h, const GridSpec& grid, std::uint64_t seed, int components) {
  const FftSampler sampler(h, grid);
  return sample_fft(sampler, h, StreamKey{seed, 0, 0}, components);
}

void write_path_csv(const FbmPath& path, std::ostream& out) {
  out << "t";
  for (int c = 0; c < path.components(); ++c) out << ",B" << (c + 1);
  out << '\n';
  for (std::size_t k = 0; k < path.grid.node_count(); ++k) {
    out << io::g17(path.grid.node(k));
    for (int c = 0; c < path.components(); ++c) out << ',' << io::g17(path.values[static_cast<std::size_t>(c)][k]);
    out << '\n';
  }
}

}  // namespace fbmlab
