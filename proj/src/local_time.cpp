#include "fbmlab/local_time.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fbmlab/errors.h"

namespace fbmlab {

std::string to_string(EstimatorKind kind) { return kind == EstimatorKind::binning ? "bin" : "sign"; }

double LocalTimeProfile::at(double a) const {
  if (levels.empty() || a < levels.front() || a > levels.back())
    throw CoverageError("level " + std::to_string(a) + " outside the profile range");
  const auto it = std::lower_bound(levels.begin(), levels.end(), a);
  const auto k = static_cast<std::size_t>(it - levels.begin());
  if (levels[k] == a) return estimates[k];
  const double w = (a - levels[k - 1]) / (levels[k] - levels[k - 1]);
  return (1.0 - w) * estimates[k - 1] + w * estimates[k];
}

double default_eps(HurstIndex h, std::int64_t n) { return 4.0 * std::pow(static_cast<double>(n), -h.value()); }

BinningEstimate binning_estimator(const FbmPath& path, double a, double eps, double t, int component) {
  if (!(eps > 0.0)) throw DomainError("binning estimator needs eps > 0");
  if (!(t > 0.0) || t > path.grid.t_end() * (1.0 + 1e-12)) throw DomainError("binning estimator: t outside the path");
  if (component < 1 || component > path.components()) throw DomainError("component not present in path");
  const auto& b = path.values[static_cast<std::size_t>(component - 1)];
  double occupied = 0.0;
  for (std::size_t k = 0; k + 1 < path.grid.node_count(); ++k) {
    const double s0 = path.grid.node(k);
    if (s0 >= t) break;
    const double len = std::min(path.grid.node(k + 1), t) - s0;
    if (std::abs(b[k] - a) <= eps) occupied += len;
  }
  BinningEstimate out;
  out.value = occupied / (2.0 * eps);
  out.resolved = eps >= 4.0 * std::pow(path.grid.step(), path.hurst.value());
  return out;
}

double sign_change_estimator(const FbmPath& path, double a, const GridSpec& grid, double t, int component) {
  path.hurst.require_theorem_scope("sign-change estimator");
  if (std::abs(t - grid.t_end()) > 1e-12 * std::max(1.0, t)) throw DomainError("sign-change estimator: t must equal the grid's t_end");
  return 2.0 * sign_change_error(path, a, grid, component);
}

double sign_change_expectation(HurstIndex h, std::int64_t n, double t) {
  const double steps = static_cast<double>(n) * t;
  if (n < 1 || !(t > 0.0) || steps != std::round(steps)) throw DomainError("sign-change expectation needs n t integral");
  const double H = h.value(), dn = static_cast<double>(n);
  double sum = 0.0;
  for (std::int64_t k = 0; k < static_cast<std::int64_t>(steps); ++k) {
    const double s = static_cast<double>(k) / dn, u = static_cast<double>(k + 1) / dn;
    const double sd = std::pow(u, H);
    const double rho = k == 0 ? 0.0 : fbm_covariance(h, s, u) / (std::pow(s, H) * sd);
    sum += sd * (1.0 - rho);
  }
  return 2.0 * std::pow(dn, 2.0 * H - 1.0) * sum / std::sqrt(2.0 * std::numbers::pi);
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kQuadTol = 1e-6;
constexpr unsigned kMaxDepth = 15;

// Asks for tol/10 and accepts an error estimate up to tol relative, or below
// abs_floor (inner integrals whose contribution underflows).
template <class F>
double integrate(F f, double lo, double hi, double tol, const char* what, double abs_floor = 0.0) {
  double err = 0.0;
  const double v =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, hi, kMaxDepth, tol / 10.0, &err);
  if (!std::isfinite(v) || (err > tol * std::abs(v) && err > abs_floor))
    throw NumericalError(std::string(what) + ": quadrature reached relative error " +
                         std::to_string(err / std::abs(v)) + " against tolerance " + std::to_string(tol));
  return v;
}

// Density of (B_u, B_{u+d}) at (a, a), written through the increments
// (B_u, B_{u+d} - B_u) so that (a, a) maps to (a, 0). The cross covariance
// ((u+d)^{2H} - u^{2H} - d^{2H})/2 is formed with expm1/log1p: the four-term
// expression loses all digits once d/u or u/d falls below machine epsilon.
double density_gap(HurstIndex h, double u, double d, double a) {
  const double e = 2.0 * h.value();
  const double ue = std::pow(u, e), de = std::pow(d, e);
  const double c = d <= u ? 0.5 * (ue * std::expm1(e * std::log1p(d / u)) - de)
                          : 0.5 * (de * std::expm1(e * std::log1p(u / d)) - ue);
  const double det = ue * de - c * c;
  if (!(det > 0.0)) return 0.0;
  return std::exp(-0.5 * a * a * de / det) / (2.0 * std::numbers::pi * std::sqrt(det));
}

// {u < v}: ∫_0^t ∫_0^v φ(u, v) du dv. Inner u = v s, split at s = 1/2 with
// s = w^r or 1 - s = w^r (r = 1/(1-H)) to absorb s^{-H} and (1-s)^{-H};
// outer v = z^{1/(2-2H)} absorbs v^{1-2H}.
double lower_simplex(HurstIndex h, double t, double a) {
  const double H = h.value();
  const double r = 1.0 / (1.0 - H);
  const double w_half = std::pow(0.5, 1.0 - H);
  auto inner = [&](double v) {
    auto near_zero = [&](double w) {
      const double s = std::pow(w, r);
      return density_gap(h, v * s, v * (1.0 - s), a) * v * r * std::pow(w, H * r);
    };
    auto near_one = [&](double w) {
      const double s = std::pow(w, r);
      return density_gap(h, v * (1.0 - s), v * s, a) * v * r * std::pow(w, H * r);
    };
    return integrate(near_zero, 0.0, w_half, kQuadTol * 1e-2, "second moment inner", 1e-10) +
           integrate(near_one, 0.0, w_half, kQuadTol * 1e-2, "second moment inner", 1e-10);
  };
  const double k = 2.0 - 2.0 * H;
  auto outer = [&](double z) {
    const double v = std::pow(z, 1.0 / k);
    return inner(v) * std::pow(z, (1.0 - k) / k) / k;
  };
  return integrate(outer, 0.0, std::pow(t, k), kQuadTol, "second moment outer");
}

// {v < u}: ∫_0^t ∫_v^t φ(v, u) du dv, the other iterated order. Inner gap
// d = u - v = (t - v) w^r absorbs d^{-H}. The outer range is split at t/2:
// v = x^r absorbs v^{-H}, t - v = y^r the (t - v)^{1-H} kink.
double upper_simplex(HurstIndex h, double t, double a) {
  const double H = h.value();
  const double r = 1.0 / (1.0 - H);
  auto inner = [&](double v) {
    const double len = t - v;
    if (!(len > 0.0)) return 0.0;
    auto f = [&](double w) { return density_gap(h, v, len * std::pow(w, r), a) * len * r * std::pow(w, H * r); };
    return integrate(f, 0.0, 1.0, kQuadTol * 1e-2, "second moment inner", 1e-10);
  };
  auto near_start = [&](double x) { return inner(std::pow(x, r)) * r * std::pow(x, H * r); };
  auto near_end = [&](double y) { return inner(t - std::pow(y, r)) * r * std::pow(y, H * r); };
  const double mid = std::pow(t / 2.0, 1.0 - H);
  return integrate(near_start, 0.0, mid, kQuadTol, "second moment outer") +
         integrate(near_end, 0.0, mid, kQuadTol, "second moment outer");
}

}  // namespace

double pair_density(HurstIndex h, double u, double v, double a) {
  if (!(u > 0.0) || !(v > 0.0) || u == v) throw DomainError("pair density needs distinct positive times");
  return u < v ? density_gap(h, u, v - u, a) : density_gap(h, v, u - v, a);
}

SecondMomentHalves second_moment_halves(HurstIndex h, double t, double a) {
  if (!(t > 0.0)) throw DomainError("moment oracle needs t > 0");
  SecondMomentHalves out;
  out.lower = lower_simplex(h, t, a);
  out.upper = upper_simplex(h, t, a);
  return out;
}

double moment_oracle(HurstIndex h, double t, double a, int p) {
  if (!(t > 0.0)) throw DomainError("moment oracle needs t > 0");
  const double H = h.value();
  if (p == 1) {
    const double r = 1.0 / (1.0 - H);
    auto f = [&](double w) {
      const double u = std::pow(w, r);
      return r * std::exp(-a * a / (2.0 * std::pow(u, 2.0 * H))) / std::sqrt(2.0 * std::numbers::pi);
    };
    return integrate(f, 0.0, std::pow(t, 1.0 - H), kQuadTol, "first moment");
  }
  if (p == 2) {
    const auto halves = second_moment_halves(h, t, a);
    return halves.lower + halves.upper;
  }
  throw DomainError("moment oracle supports p = 1 or 2");
}

// ---------------------------------------------------------------------------

double limit_functional(const LocalTimeProfile& profile, const SignedMeasure& mu) {
  double v = 0.0;
  for (const Atom& at : mu.atoms()) v += at.mass * profile.at(at.location);
  return v;
}

double limit_functional(const FbmPath& path, const GridSpec& grid, const SignedMeasure& mu, int component) {
  double v = 0.0;
  for (const Atom& at : mu.atoms())
    v += at.mass * sign_change_estimator(path, at.location, grid, grid.t_end(), component);
  return v;
}

LocalTimeProfile binning_profile(const FbmPath& path, const std::vector<double>& levels, double eps, double t,
                                 int component) {
  LocalTimeProfile out{levels, {}, EstimatorKind::binning, eps, t, path.hurst};
  if (!std::is_sorted(levels.begin(), levels.end())) throw DomainError("profile levels must increase");
  for (double a : levels) out.estimates.push_back(binning_estimator(path, a, eps, t, component).value);
  return out;
}

LocalTimeProfile sign_change_profile(const FbmPath& path, const std::vector<double>& levels, const GridSpec& grid,
                                     int component) {
  LocalTimeProfile out{levels, {}, EstimatorKind::sign_change, static_cast<double>(grid.points_per_unit()),
                       grid.t_end(), path.hurst};
  if (!std::is_sorted(levels.begin(), levels.end())) throw DomainError("profile levels must increase");
  for (double a : levels) out.estimates.push_back(sign_change_estimator(path, a, grid, grid.t_end(), component));
  return out;
}

}  // namespace fbmlab
