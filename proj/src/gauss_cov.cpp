#include "fbmlab/gauss_cov.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fbmlab/errors.h"
#include "fbmlab/rng.h"

namespace fbmlab {

namespace {

Eigen::VectorXd unit_sphere(NormalStream& normals, Eigen::Index m) {
  Eigen::VectorXd u(m);
  double norm = 0.0;
  while (norm == 0.0) {
    for (Eigen::Index i = 0; i < m; ++i) u[i] = normals.next();
    norm = u.norm();
  }
  return u / norm;
}

Eigen::VectorXd powered_lengths(const IncrementCovariance& cov) {
  const auto& w = cov.windows.pairs();
  Eigen::VectorXd out(static_cast<Eigen::Index>(w.size()));
  for (std::size_t i = 0; i < w.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = std::pow(w[i].length(), 2.0 * cov.hurst.value());
  return out;
}

double condition_number(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

}  // namespace

// ---------------------------------------------------------------------------

IncrementWindows::IncrementWindows(std::vector<Window> pairs, bool allow_degenerate) : pairs_(std::move(pairs)) {
  if (pairs_.empty()) throw DomainError("increment windows: need at least one pair");
  for (const Window& w : pairs_) {
    if (w.a1 < 0.0 || w.a2 < 0.0 || !std::isfinite(w.a1) || !std::isfinite(w.a2))
      throw DomainError("increment windows: times must be finite and non-negative");
    if (!allow_degenerate && w.a1 == w.a2) throw DomainError("increment windows: degenerate increment");
  }
}

IncrementWindows IncrementWindows::consecutive(const std::vector<double>& s) {
  if (s.size() < 2) throw DomainError("consecutive windows need at least two times");
  std::vector<Window> w;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (!(s[i] > s[i - 1])) throw DomainError("consecutive windows: times must increase strictly");
    w.push_back({s[i], s[i - 1]});
  }
  return IncrementWindows(std::move(w));
}

IncrementWindows IncrementWindows::alternating(const std::vector<double>& s) {
  if (s.size() < 2 || s.size() % 2 != 0) throw DomainError("alternating windows need an even number of times");
  std::vector<Window> w;
  for (std::size_t i = 0; i + 1 < s.size(); i += 2) {
    if (!(s[i + 1] > s[i])) throw DomainError("alternating windows: s_{2i} < s_{2i+1} required");
    if (i > 0 && s[i] < s[i - 1]) throw DomainError("alternating windows: s_{2i-1} <= s_{2i} required");
    w.push_back({s[i + 1], s[i]});
  }
  return IncrementWindows(std::move(w));
}

bool IncrementWindows::is_consecutive_from_zero() const noexcept {
  double prev = 0.0;
  for (const Window& w : pairs_) {
    const double lo = std::min(w.a1, w.a2), hi = std::max(w.a1, w.a2);
    if (lo != prev || !(hi > lo)) return false;
    prev = hi;
  }
  return true;
}

bool IncrementWindows::is_ordered_disjoint() const noexcept {
  double prev = 0.0;
  for (const Window& w : pairs_) {
    const double lo = std::min(w.a1, w.a2), hi = std::max(w.a1, w.a2);
    if (lo < prev || !(hi > lo)) return false;
    prev = hi;
  }
  return true;
}

IncrementCovariance build_increment_cov(const IncrementWindows& windows, HurstIndex h) {
  const auto& w = windows.pairs();
  const auto m = static_cast<Eigen::Index>(w.size());
  Eigen::MatrixXd s(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      const Window& a = w[static_cast<std::size_t>(i)];
      const Window& b = w[static_cast<std::size_t>(j)];
      s(i, j) = increment_covariance(h, a.a1, a.a2, b.a1, b.a2);
    }
  Eigen::MatrixXd sym = 0.5 * (s + s.transpose());
  return IncrementCovariance{windows, h, std::move(sym)};
}

// ---------------------------------------------------------------------------

IncrementPartition::IncrementPartition(std::size_t total, std::vector<std::size_t> small_indices,
                                       double separation_ratio)
    : total_(total), small_(std::move(small_indices)), h_(separation_ratio) {
  if (!(h_ > 0.0 && h_ < 1.0)) throw DomainError("separation ratio must lie in (0,1)");
  if (small_.size() >= total_) throw DomainError("partition needs at least one large increment");
  std::sort(small_.begin(), small_.end());
  for (std::size_t i = 0; i < small_.size(); ++i) {
    if (small_[i] < 2 || small_[i] > total_) throw DomainError("small indices must lie in [2, p+q]");
    if (i > 0 && small_[i] - small_[i - 1] < 2) throw DomainError("small indices must not be adjacent");
  }
}

std::vector<std::size_t> IncrementPartition::large() const {
  std::vector<std::size_t> out;
  for (std::size_t k = 1; k <= total_; ++k)
    if (!is_small(k)) out.push_back(k);
  return out;
}

bool IncrementPartition::is_small(std::size_t k) const noexcept {
  return std::binary_search(small_.begin(), small_.end(), k);
}

void IncrementPartition::validate(const std::vector<double>& times) const {
  if (times.size() != total_ + 1) throw DomainError("partition: expected p+q+1 times");
  if (times[0] != 0.0) throw DomainError("partition: t_0 must be 0");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1])) throw DomainError("partition: times must increase strictly");
  double max_small = 0.0, min_large = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k <= total_; ++k) {
    const double len = times[k] - times[k - 1];
    if (is_small(k))
      max_small = std::max(max_small, len);
    else
      min_large = std::min(min_large, len);
  }
  if (max_small > h_ * min_large * (1.0 + 1e-12))
    throw DomainError("partition: a small increment exceeds h times a large one");
}

// ---------------------------------------------------------------------------

NondeterminismCertificate check_local_nondeterminism(const IncrementCovariance& cov, std::size_t trials,
                                                     std::uint64_t rng_seed) {
  if (!cov.windows.is_consecutive_from_zero())
    throw DomainError("local non-determinism check needs consecutive increments from 0");
  const Eigen::VectorXd var = powered_lengths(cov);
  const auto m = static_cast<Eigen::Index>(var.size());
  NormalStream normals(StreamKey{rng_seed, 0, 0});
  NondeterminismCertificate cert;
  cert.l_hat = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < trials; ++t) {
    const Eigen::VectorXd u = unit_sphere(normals, m);
    const double r = u.dot(cov.matrix * u) / u.cwiseAbs2().dot(var);
    cert.l_hat = std::min(cert.l_hat, r);
    cert.r_max = std::max(cert.r_max, r);
    if (r > static_cast<double>(m) * (1.0 + 1e-12)) ++cert.violations;
  }
  return cert;
}

DeterminantSandwich determinant_sandwich(const IncrementCovariance& cov) {
  if (!cov.windows.is_ordered_disjoint()) throw DomainError("determinant sandwich needs ordered disjoint windows");
  const Eigen::VectorXd var = powered_lengths(cov);
  const double prod = var.prod();
  double factorial = 1.0;
  for (Eigen::Index k = 2; k <= var.size(); ++k) factorial *= static_cast<double>(k);
  DeterminantSandwich out;
  out.det = cov.matrix.partialPivLu().determinant();
  out.lower_ratio = out.det / prod;
  out.upper_ratio = out.det / (factorial * prod);
  out.violation = !(out.det > 0.0) || out.upper_ratio > 1.0 + 1e-9;
  return out;
}

EigenBracket eigenvalue_bracket(const IncrementCovariance& cov) {
  if (!cov.windows.is_consecutive_from_zero()) throw DomainError("eigenvalue bracket needs consecutive increments");
  const Eigen::VectorXd var = powered_lengths(cov);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov.matrix, Eigen::EigenvaluesOnly);
  EigenBracket out;
  out.lambda_min = eig.eigenvalues().minCoeff();
  out.lambda_max = eig.eigenvalues().maxCoeff();
  const double upper = static_cast<double>(var.size()) * var.maxCoeff();
  out.bracket_ok = out.lambda_min > 0.0 && out.lambda_max <= upper * (1.0 + 1e-12);
  out.lower_ratio = out.lambda_min / var.minCoeff();
  return out;
}

// ---------------------------------------------------------------------------

FactorisationCheck decomp_factorisation_check(const std::vector<double>& times, const IncrementPartition& part,
                                              HurstIndex h) {
  part.validate(times);
  const double e = 2.0 * h.value();
  const auto full = build_increment_cov(IncrementWindows::consecutive(times), h);

  // Σ' is the covariance of the large-index increments after merging each
  // small increment into the following large one.
  const std::vector<std::size_t> large = part.large();
  std::vector<Window> merged;
  std::size_t prev = 0;
  for (std::size_t k : large) {
    merged.push_back({times[k], times[prev]});
    prev = k;
  }
  const auto reduced = build_increment_cov(IncrementWindows(std::move(merged)), h);

  FactorisationCheck out;
  out.condition = std::max(condition_number(full.matrix), condition_number(reduced.matrix));
  if (!(out.condition <= kMaxCondition))
    throw ConditioningError("decomposition check: covariance is numerically singular", out.condition);

  const auto lu = full.matrix.partialPivLu();
  const auto lu_reduced = reduced.matrix.partialPivLu();
  const Eigen::MatrixXd inv = lu.inverse();
  const Eigen::MatrixXd inv_reduced = lu_reduced.inverse();

  auto len = [&](std::size_t k) { return times[k] - times[k - 1]; };
  auto idx = [](std::size_t k) { return static_cast<Eigen::Index>(k - 1); };

  double small_prod = 1.0;
  for (std::size_t k : part.small()) small_prod *= std::pow(len(k), e);
  out.theta1 = lu.determinant() / (lu_reduced.determinant() * small_prod) - 1.0;

  const std::size_t p = part.p(), q = part.q();
  out.theta2.resize(p);
  out.theta3.assign(p, std::vector<double>(p, 0.0));
  for (std::size_t a = 0; a < p; ++a) {
    const std::size_t i = part.small()[a];
    out.theta2[a] = inv(idx(i), idx(i)) * std::pow(len(i), e) - 1.0;
    for (std::size_t b = 0; b < p; ++b) {
      if (a == b) continue;
      const std::size_t j = part.small()[b];
      out.theta3[a][b] = inv(idx(i), idx(j)) * std::pow(len(i), h.value()) * std::pow(len(j), h.value());
    }
  }
  out.theta4.assign(q, std::vector<double>(q, 0.0));
  for (std::size_t a = 0; a < q; ++a)
    for (std::size_t b = 0; b < q; ++b) {
      const double num = inv(idx(large[a]), idx(large[b]));
      const double den = inv_reduced(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      // Both entries vanish together for independent increments.
      out.theta4[a][b] = den == 0.0 ? (num == 0.0 ? 0.0 : INFINITY) : num / den - 1.0;
    }

  out.cof_bound_ok = true;
  for (std::size_t i : part.small())
    for (std::size_t j : large) {
      const double li = len(i), lj = len(j);
      const double scale = std::max(li * std::pow(lj, e - 1.0), std::pow(li, e - 1.0) * lj);
      const double v = std::abs(inv(idx(i), idx(j))) * scale;
      out.cof_scaled.push_back(v);
      if (!std::isfinite(v)) out.cof_bound_ok = false;
    }
  return out;
}

double quadratic_form_floor(const IncrementCovariance& cov, std::size_t trials, std::uint64_t rng_seed) {
  if (!cov.windows.is_ordered_disjoint()) throw DomainError("quadratic form floor needs ordered disjoint windows");
  const double cond = condition_number(cov.matrix);
  if (!(cond <= kMaxCondition)) throw ConditioningError("quadratic form floor: singular covariance", cond);
  const Eigen::MatrixXd inv = cov.matrix.partialPivLu().inverse();
  const Eigen::VectorXd var = powered_lengths(cov);
  NormalStream normals(StreamKey{rng_seed, 0, 0});
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < trials; ++t) {
    const Eigen::VectorXd x = unit_sphere(normals, var.size());
    best = std::min(best, x.dot(inv * x) / x.cwiseAbs2().cwiseQuotient(var).sum());
  }
  if (!(best > 0.0)) throw NumericalError("quadratic form floor is not positive: " + std::to_string(best));
  return best;
}

double covariance_bound_constant(HurstIndex h) { return h.value() * std::pow(2.0, 2.0 - 2.0 * h.value()); }

CovarianceBoundCheck check_increment_covariance_bound(HurstIndex h, double horizon, std::size_t trials,
                                                      std::uint64_t rng_seed) {
  if (!(horizon > 0.0)) throw DomainError("horizon must be > 0");
  const double sharp = covariance_bound_constant(h);
  NormalStream stream(StreamKey{rng_seed, 0, 0});
  CovarianceBoundCheck out;
  out.trials = trials;
  for (std::size_t k = 0; k < trials; ++k) {
    const double t = horizon * stream.uniform();
    double u = horizon * stream.uniform();
    double v = horizon * stream.uniform();
    if (u > v) std::swap(u, v);
    const double lhs = std::abs(increment_covariance(h, v, u, t, 0.0));
    const double rhs = std::pow(t, 2.0 * h.value() - 1.0) * (v - u);
    if (lhs > rhs + 1e-12) ++out.violations_unit;
    if (lhs > sharp * rhs + 1e-12) ++out.violations_sharp;
    if (rhs > 0.0) out.max_ratio = std::max(out.max_ratio, lhs / rhs);
  }
  return out;
}

RandomConfigurationCheck check_random_configurations(HurstIndex h, double horizon, std::size_t configs,
                                                     std::uint64_t rng_seed) {
  if (!(horizon > 0.0)) throw DomainError("horizon must be > 0");
  NormalStream stream(StreamKey{rng_seed, 0, 1});
  RandomConfigurationCheck out;
  out.configs = configs;
  out.min_det_lower_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < configs; ++c) {
    const auto m = 2 + static_cast<std::size_t>(5.0 * stream.uniform());
    std::vector<double> s;
    for (;;) {
      s.assign(1, 0.0);
      for (std::size_t i = 0; i < m; ++i) s.push_back(horizon * (1.0 - stream.uniform()));
      std::sort(s.begin(), s.end());
      bool spread = true;
      for (std::size_t i = 1; i < s.size(); ++i) spread = spread && s[i] - s[i - 1] >= 1e-6 * horizon;
      if (spread) break;
    }
    const auto cov = build_increment_cov(IncrementWindows::consecutive(s), h);
    const auto sandwich = determinant_sandwich(cov);
    if (sandwich.violation) ++out.sandwich_violations;
    if (!eigenvalue_bracket(cov).bracket_ok) ++out.bracket_violations;
    out.min_det_lower_ratio = std::min(out.min_det_lower_ratio, sandwich.lower_ratio);
    out.max_det_upper_ratio = std::max(out.max_det_upper_ratio, sandwich.upper_ratio);
  }
  return out;
}

}  // namespace fbmlab
