#include "fbmlab/bound_lab.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fbmlab/errors.h"
#include "fbmlab/fit.h"
#include "fbmlab/local_time.h"
#include "fbmlab/parallel.h"

namespace fbmlab {

namespace {

constexpr std::size_t kChunk = 1 << 14;

struct Names {
  Functional f;
  const char* name;
};
constexpr std::array<Names, 5> kNames{{{Functional::step2_crossing, "step2"},
                                       {Functional::step1_indicator_product, "step1"},
                                       {Functional::prop13_crossing, "prop13"},
                                       {Functional::constant, "constant"},
                                       {Functional::zero, "zero"}}};

bool crosses(double x0, double x1) { return (x0 >= 0.0) != (x1 >= 0.0); }
double step(double x) { return x >= 0.0 ? 1.0 : 0.0; }

// Mean and standard error of sample(stream) over `count` draws, chunked into
// independent substreams and reduced in a fixed order.
template <class Sample>
Estimate monte_carlo(std::size_t count, StreamKey key, unsigned threads, Sample sample) {
  const std::size_t chunks = (count + kChunk - 1) / kChunk;
  std::vector<double> sums(chunks), squares(chunks);
  parallel_for(chunks, std::max(1u, threads), [&](std::size_t c) {
    NormalStream normals(key.with_replicate(c));
    const std::size_t len = std::min(kChunk, count - c * kChunk);
    double s = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
      const double v = sample(normals);
      s += v;
      s2 += v * v;
    }
    sums[c] = s;
    squares[c] = s2;
  });
  const double n = static_cast<double>(count);
  const double mean = pairwise_sum(sums) / n;
  const double var = std::max(0.0, (pairwise_sum(squares) / n - mean * mean) * n / (n - 1.0));
  return {mean, std::sqrt(var / n)};
}

void require_samples(std::size_t n, std::size_t minimum, const char* what) {
  if (n < minimum) throw DomainError(std::string(what) + " needs at least " + std::to_string(minimum) + " samples");
}

}  // namespace

std::string to_string(Functional f) {
  for (const auto& n : kNames)
    if (n.f == f) return n.name;
  return "unknown";
}

Functional functional_from_string(const std::string& name) {
  for (const auto& n : kNames)
    if (name == n.name) return n.f;
  throw DomainError("unknown functional '" + name + "'");
}

H1Witness witness(Functional f) {
  switch (f) {
    case Functional::step2_crossing: return {{2}, 1.0, "|x1 + x2|"};
    case Functional::step1_indicator_product: return {{2, 4}, 1.0, "1"};
    case Functional::prop13_crossing: return {{2}, 1.0, "|x1 + x2|"};
    case Functional::zero: return {{2}, 1.0, "0"};
    case Functional::constant: break;
  }
  throw ScopeError("functional '" + to_string(f) + "' has no small-increment witness");
}

std::vector<double> DecouplingExperiment::times() const {
  if (!(h > 0.0 && h < 1.0)) throw DomainError("separation ratio h must lie in (0, 1)");
  if (!(base > 0.0)) throw DomainError("base length must be positive");
  const double L = base, s = h * base;
  switch (functional) {
    case Functional::step2_crossing: return {L, L + s, 2 * L + s};
    case Functional::step1_indicator_product: return {L, L + s, 2 * L + s, 2 * L + 2 * s};
    default: return {L, L + s};
  }
}

IncrementPartition DecouplingExperiment::partition() const {
  const auto t = times();
  const std::vector<std::size_t> small =
      functional == Functional::step1_indicator_product ? std::vector<std::size_t>{2, 4} : std::vector<std::size_t>{2};
  IncrementPartition part(t.size(), small, h);
  std::vector<double> with_zero{0.0};
  with_zero.insert(with_zero.end(), t.begin(), t.end());
  part.validate(with_zero);
  return part;
}

double surrogate_prefactor(const DecouplingExperiment& exp) {
  const auto part = exp.partition();
  std::vector<double> t{0.0};
  const auto tt = exp.times();
  t.insert(t.end(), tt.begin(), tt.end());
  const auto large = part.large();
  std::vector<Window> windows;
  std::size_t prev = 0;
  for (std::size_t k : large) {
    windows.push_back({t[k], t[prev]});
    prev = k;
  }
  const auto cov = build_increment_cov(IncrementWindows(windows), exp.hurst);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov.matrix);
  const double lmin = eig.eigenvalues().minCoeff(), lmax = eig.eigenvalues().maxCoeff();
  if (!(lmin > 0.0) || lmax / lmin > kMaxCondition)
    throw ConditioningError("reduced covariance is ill-conditioned", lmin > 0.0 ? lmax / lmin : INFINITY);
  const auto q = static_cast<Eigen::Index>(large.size());
  Eigen::VectorXd x = Eigen::VectorXd::Zero(q);
  x(0) = exp.a;
  const auto llt = cov.matrix.llt();
  const double quad = x.dot(llt.solve(x));
  const double det = cov.matrix.determinant();
  return std::exp(-0.5 * quad) / (std::pow(2.0 * std::numbers::pi, 0.5 * static_cast<double>(q)) * std::sqrt(det));
}

Estimate surrogate_expectation(const DecouplingExperiment& exp, bool absolute) {
  if (exp.functional == Functional::constant)
    throw ScopeError("the constant functional has no decoupled surrogate");
  require_samples(exp.mc_samples, 1000, "surrogate expectation");
  const double pref = surrogate_prefactor(exp);
  if (exp.functional == Functional::zero) return {0.0, 0.0};
  const double theta = std::pow(exp.h * exp.base, exp.hurst.value());
  const StreamKey key{exp.seed, 0, 2};
  Estimate inner;
  if (exp.functional == Functional::step1_indicator_product) {
    // ∫ (1{c + y2 + X2 >= 0} - 1{c + y2 >= 0}) dy2 = X2 for every c; likewise X1 for y1.
    inner = monte_carlo(exp.mc_samples, key, exp.threads, [&](NormalStream& z) {
      const double x1 = theta * z.next(), x2 = theta * z.next();
      return absolute ? std::abs(x1 * x2) : x1 * x2;
    });
  } else {
    // y-integral of |y + X| 1{sgn(y + X) != sgn y} is X^2/2; the ε-window integrates to 1.
    inner = monte_carlo(exp.mc_samples, key, exp.threads, [&](NormalStream& z) {
      const double x = theta * z.next();
      return 0.5 * x * x;
    });
  }
  return {pref * inner.mean, pref * inner.stderr_};
}

Estimate true_expectation(const DecouplingExperiment& exp) {
  require_samples(exp.mc_samples, 1000, "true expectation");
  if (exp.functional == Functional::constant) return {1.0, 0.0};
  if (exp.functional == Functional::zero) return {0.0, 0.0};
  const auto t = exp.times();
  const double a = exp.a;
  const StreamKey key{exp.seed, 0, 1};

  if (exp.functional == Functional::step2_crossing) {
    // Increments (Y1, Y2, Y3) on [0,t1], [t1,t2], [t2,t3]; condition on their sum = a.
    const auto cov = build_increment_cov(IncrementWindows::consecutive({0.0, t[0], t[1], t[2]}), exp.hurst);
    const Eigen::VectorXd row = cov.matrix.rowwise().sum();
    const double total = row.sum();
    Eigen::MatrixXd cc(2, 2);
    Eigen::VectorXd mean(2);
    for (int i = 0; i < 2; ++i) {
      mean(i) = row(i) * a / total;
      for (int j = 0; j < 2; ++j) cc(i, j) = cov.matrix(i, j) - row(i) * row(j) / total;
    }
    const GaussianSampler sampler(cc, mean);
    const double density = std::exp(-0.5 * a * a / total) / std::sqrt(2.0 * std::numbers::pi * total);
    const auto est = monte_carlo(exp.mc_samples, key, exp.threads, [&](NormalStream& z) {
      std::array<double, 2> y{};
      sampler.draw(z, y);
      const double x1 = y[0] - a, x2 = y[0] + y[1] - a;
      return crosses(x1, x2) ? std::abs(x2) : 0.0;
    });
    return {density * est.mean, density * est.stderr_};
  }

  const ExactSampler sampler(exp.hurst, t);
  if (exp.functional == Functional::prop13_crossing) {
    return monte_carlo(exp.mc_samples, key, exp.threads, [&](NormalStream& z) {
      std::array<double, 2> b{};
      sampler.draw(z, b);
      const double x1 = b[0] - a, x2 = b[1] - a;
      return crosses(x1, x2) ? std::abs(x2) : 0.0;
    });
  }
  return monte_carlo(exp.mc_samples, key, exp.threads, [&](NormalStream& z) {
    std::array<double, 4> b{};
    sampler.draw(z, b);
    return (step(b[1] - a) - step(b[0] - a)) * (step(b[3] - a) - step(b[2] - a));
  });
}

std::string to_string(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::pass: return "PASS";
    case VerdictStatus::fail: return "FAIL";
    case VerdictStatus::inconclusive: return "INCONCLUSIVE";
  }
  return "INCONCLUSIVE";
}

ScalingReport decoupling_scaling(const DecouplingExperiment& base, const std::vector<double>& h_grid) {
  base.hurst.require_theorem_scope("decoupling scaling");
  if (h_grid.size() < 5) throw DomainError("decoupling scaling needs at least 5 h levels");
  for (std::size_t i = 0; i < h_grid.size(); ++i) {
    const double e = std::log2(h_grid[i]);
    if (!(h_grid[i] > 0.0 && h_grid[i] < 1.0) || e != std::round(e))
      throw DomainError("h grid must hold dyadic values in (0, 1)");
    for (std::size_t j = 0; j < i; ++j)
      if (h_grid[j] == h_grid[i]) throw DomainError("h grid values must be distinct");
  }

  ScalingReport report;
  report.target = 2.0 - 2.0 * base.hurst.value();
  for (double h : h_grid) {
    DecouplingExperiment e = base;
    e.h = h;
    ScalingRow row;
    row.h = h;
    row.truth = true_expectation(e);
    row.surrogate = surrogate_expectation(e);
    row.surrogate_abs = surrogate_expectation(e, true).mean;
    row.discrepancy = std::abs(row.truth.mean - row.surrogate.mean);
    row.discrepancy_se = std::hypot(row.truth.stderr_, row.surrogate.stderr_);
    row.relative = row.discrepancy / row.surrogate_abs;
    row.relative_se = row.discrepancy_se / row.surrogate_abs;
    row.significant = row.discrepancy > 2.0 * row.discrepancy_se;
    report.rows.push_back(row);
  }

  const auto widest = std::max_element(report.rows.begin(), report.rows.end(),
                                       [](const ScalingRow& x, const ScalingRow& y) { return x.h < y.h; });
  if (widest->discrepancy_se >= 0.2 * widest->discrepancy) {
    report.reason = "underpowered: stderr at the largest h is at least 20% of the discrepancy";
    return report;
  }
  std::vector<RatePoint> pts;
  for (const auto& r : report.rows)
    if (r.significant) pts.push_back({r.h, r.relative, r.relative_se});
  if (pts.size() < 3) {
    report.reason = "fewer than 3 h levels with a discrepancy above Monte Carlo noise";
    return report;
  }
  const RateFit fit = fit_rate(pts);
  report.slope = fit.slope;
  report.half_width = fit.half_width;
  report.status = fit.slope >= report.target - 0.4 ? VerdictStatus::pass : VerdictStatus::fail;
  report.reason = "fit over " + std::to_string(pts.size()) + " significant levels";
  return report;
}

Theta1Scaling theta1_scaling(HurstIndex h, const std::vector<double>& h_grid) {
  Theta1Scaling out;
  out.target = 2.0 - 2.0 * h.value();
  std::vector<RatePoint> pts;
  for (double hv : h_grid) {
    DecouplingExperiment e;
    e.hurst = h;
    e.h = hv;
    std::vector<double> t{0.0};
    const auto tt = e.times();
    t.insert(t.end(), tt.begin(), tt.end());
    const double th = std::abs(decomp_factorisation_check(t, e.partition(), h).theta1);
    out.h.push_back(hv);
    out.theta1.push_back(th);
    pts.push_back({hv, th, 0.0});
  }
  out.slope = fit_rate(pts).slope;
  out.pass = std::abs(out.slope - out.target) <= 0.3;
  return out;
}

EnvelopeCheck envelope_check(const DecouplingExperiment& base, double a_far) {
  constexpr std::array<double, 3> levels{0.0, 0.5, 1.0};
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (double a : levels) {
    DecouplingExperiment e = base;
    e.a = a;
    const double m = std::abs(true_expectation(e).mean);
    if (!(m > 0.0)) throw FitError("envelope fit: zero mean at a = " + std::to_string(a));
    const double x = a * a, y = std::log(m);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double k = static_cast<double>(levels.size());
  const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  EnvelopeCheck out;
  out.d_hat = -slope;
  out.log_c = (sy - slope * sx) / k;
  out.envelope = std::exp(out.log_c - out.d_hat * a_far * a_far);
  DecouplingExperiment e = base;
  e.a = a_far;
  out.far = true_expectation(e);
  out.within = std::abs(out.far.mean) <= out.envelope + 3.0 * out.far.stderr_;
  return out;
}

// ---------------------------------------------------------------------------

double lemma_a1_oracle(double theta) {
  if (!(theta >= 0.0)) throw DomainError("theta must be non-negative");
  return 0.5 * theta * theta;
}

Estimate lemma_a1_monte_carlo(double theta, std::size_t samples, std::uint64_t seed, double alpha) {
  if (!(theta >= 0.0)) throw DomainError("theta must be non-negative");
  require_samples(samples, 1000, "crossing integral Monte Carlo");
  // y - α = -X u with u uniform: the crossing interval has length |X|.
  return monte_carlo(samples, StreamKey{seed, 0, 11}, 1, [&](NormalStream& z) {
    const double x = theta * z.next();
    const double y = alpha - x * z.uniform();
    return std::abs(x) * std::abs(y + x - alpha);
  });
}

LemmaA2Result lemma_a2_check(double theta1, double theta2, std::size_t samples, std::uint64_t seed, double alpha) {
  require_samples(samples, 100'000, "indicator integral check");
  const double w1 = 8.0 * std::abs(theta1), w2 = 8.0 * std::abs(theta2);
  LemmaA2Result out;
  out.lhs1 = monte_carlo(samples, StreamKey{seed, 0, 12}, 1, [&](NormalStream& z) {
    const double x2 = theta2 * z.next();
    const double y = alpha + w2 * (2.0 * z.uniform() - 1.0);
    return 2.0 * w2 * std::abs(step(y - alpha) - step(y + x2 - alpha));
  });
  out.lhs2 = monte_carlo(samples, StreamKey{seed, 0, 13}, 1, [&](NormalStream& z) {
    const double x1 = theta1 * z.next(), x2 = theta2 * z.next();
    const double y1 = alpha + w1 * (2.0 * z.uniform() - 1.0);
    const double c = y1 + x1;
    const double y2 = alpha - c + w2 * (2.0 * z.uniform() - 1.0);
    const double f = (step(y1 - alpha) - step(c - alpha)) * (step(c + y2 - alpha) - step(c + y2 + x2 - alpha));
    return 4.0 * w1 * w2 * std::abs(f);
  });
  auto within = [](const Estimate& e, double bound) {
    const double rel = e.mean > 0.0 ? e.stderr_ / e.mean : 0.0;
    return e.mean <= bound * (1.0 + 3.0 * rel);
  };
  out.pass = within(out.lhs1, std::abs(theta2)) && within(out.lhs2, std::abs(theta1 * theta2));
  return out;
}

// ---------------------------------------------------------------------------

double lemma_a3_integral(HurstIndex h, double a, double horizon, std::int64_t n) {
  if (n < 4) throw DomainError("density increment integral needs n >= 4");
  if (!(horizon > 0.0)) throw DomainError("horizon must be positive");
  const double dn = static_cast<double>(n), gap = 2.0 / dn;
  const auto cells = static_cast<std::int64_t>(std::ceil(horizon * dn));
  std::vector<double> per_cell(static_cast<std::size_t>(cells), 0.0);

  parallel_for(per_cell.size(), resolve_threads(), [&](std::size_t k) {
    const double lo = std::max(static_cast<double>(k) / dn, gap);
    const double hi = std::min(static_cast<double>(k + 1) / dn, horizon);
    if (!(hi > lo)) return;
    const double un = static_cast<double>(k) / dn;
    auto inner = [&](double u) {
      auto f = [&](double v) { return std::abs(pair_density(h, u, v, a) - pair_density(h, un, v, a)); };
      double s = 0.0;
      using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
      if (u - gap > gap) s += GK::integrate(f, gap, u - gap, 12, 1e-9);
      if (horizon > u + gap) s += GK::integrate(f, u + gap, horizon, 12, 1e-9);
      return s;
    };
    per_cell[k] = boost::math::quadrature::gauss<double, 10>::integrate(inner, lo, hi);
  });
  return pairwise_sum(per_cell);
}

LemmaA3Report lemma_a3_decay(HurstIndex h, double a, double horizon, const std::vector<std::int64_t>& ns) {
  LemmaA3Report out;
  std::vector<RatePoint> pts;
  for (std::int64_t n : ns) {
    const double v = lemma_a3_integral(h, a, horizon, n);
    out.points.push_back({n, v});
    pts.push_back({static_cast<double>(n), v, 0.0});
  }
  out.slope = fit_rate(pts).slope;
  out.pass = out.slope <= -(1.0 - h.value()) + 0.3;
  return out;
}

}  // namespace fbmlab
