#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "fbmlab/errors.h"
#include "fbmlab/fit.h"
#include "fbmlab/gauss_cov.h"

using namespace fbmlab;
using Catch::Approx;

namespace {

IncrementCovariance cov_of(const std::vector<Window>& w, double h) {
  return build_increment_cov(IncrementWindows(w), HurstIndex(h));
}

IncrementCovariance consecutive_cov(const std::vector<double>& s, double h) {
  return build_increment_cov(IncrementWindows::consecutive(s), HurstIndex(h));
}

std::vector<double> step2_times(double h) { return {0.0, 1.0, 1.0 + h, 2.0 + h}; }

double log2_slope(const std::vector<double>& hs, const std::vector<double>& values) {
  std::vector<RatePoint> pts;
  for (std::size_t i = 0; i < hs.size(); ++i) pts.push_back({hs[i], std::abs(values[i]), 0.0});
  return fit_rate(pts).slope;
}

const std::vector<double> kHGrid{0x1p-3, 0x1p-4, 0x1p-5, 0x1p-6, 0x1p-7, 0x1p-8, 0x1p-9};

}  // namespace

TEST_CASE("increment covariance examples", "[cov]") {
  const auto id = consecutive_cov({0, 1, 2, 3}, 0.5);
  CHECK(id.matrix.isApprox(Eigen::MatrixXd::Identity(3, 3), 1e-14));

  const auto single = cov_of({{0.7, 0.0}}, 0.75);
  CHECK(single.matrix(0, 0) == Approx(std::pow(0.7, 1.5)));

  const auto two = cov_of({{1, 0}, {2, 1}}, 0.75);
  CHECK(two.matrix(0, 1) == Approx(0.5 * (std::pow(2.0, 1.5) - 2)).epsilon(1e-12));
  CHECK(two.matrix(0, 1) == Approx(0.4142).margin(1e-4));
  CHECK(two.matrix(1, 0) == two.matrix(0, 1));

  CHECK_THROWS_AS(IncrementWindows({{1, 1}}), DomainError);
  CHECK_NOTHROW(IncrementWindows({{1, 1}}, true));
  CHECK_THROWS_AS(IncrementWindows({{-1, 1}}), DomainError);
}

TEST_CASE("covariances are symmetric positive semidefinite", "[cov]") {
  for (double h : {0.2, 0.5, 0.8}) {
    const auto c = cov_of({{0.3, 0.1}, {0.9, 0.2}, {1.0, 0.0}, {0.5, 0.45}}, h);
    CHECK((c.matrix - c.matrix.transpose()).norm() == 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c.matrix);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10 * es.eigenvalues().maxCoeff());
  }
}

TEST_CASE("local nondeterminism certificate", "[cov]") {
  const auto one = check_local_nondeterminism(consecutive_cov({0, 0.4}, 0.75), 1000, 1);
  CHECK(one.l_hat == Approx(1.0));
  CHECK(one.r_max == Approx(1.0));

  const auto bm = check_local_nondeterminism(consecutive_cov({0, 0.1, 0.5, 0.6, 1.3}, 0.5), 1000, 2);
  CHECK(bm.l_hat == Approx(1.0));
  CHECK(bm.r_max == Approx(1.0));

  const auto c = check_local_nondeterminism(consecutive_cov({0, 0.25, 0.5, 0.75, 1}, 0.75), 10000, 3);
  CHECK(c.l_hat > 0.0);
  CHECK(c.l_hat <= 1.0);
  CHECK(c.violations == 0);
}

TEST_CASE("determinant sandwich", "[cov]") {
  const auto unit = determinant_sandwich(cov_of({{0, 1}}, 0.6));
  CHECK(unit.det == Approx(1.0));
  CHECK(unit.lower_ratio == Approx(1.0));
  CHECK(unit.upper_ratio == Approx(1.0));

  const auto bm = determinant_sandwich(consecutive_cov({0, 0.2, 0.7, 1.5}, 0.5));
  CHECK(bm.det == Approx(0.2 * 0.5 * 0.8));
  CHECK(bm.lower_ratio == Approx(1.0));

  const auto c = cov_of({{0, 0.3}, {0.5, 0.9}}, 0.6);
  const auto s = determinant_sandwich(c);
  CHECK(s.det == Approx(c.matrix.determinant()));
  CHECK(s.upper_ratio <= 1.0);
  CHECK_FALSE(s.violation);
}

TEST_CASE("eigenvalue bracket", "[cov]") {
  const auto bm = eigenvalue_bracket(consecutive_cov({0, 0.2, 0.7, 1.5}, 0.5));
  CHECK(bm.lambda_min == Approx(0.2));
  CHECK(bm.lambda_max == Approx(0.8));
  CHECK(bm.bracket_ok);

  const auto one = eigenvalue_bracket(consecutive_cov({0, 0.3}, 0.7));
  CHECK(one.lambda_min == Approx(std::pow(0.3, 1.4)));
  CHECK(one.bracket_ok);

  CHECK(eigenvalue_bracket(consecutive_cov({0, 0.1, 0.6, 0.7, 1.0}, 0.8)).bracket_ok);
}

TEST_CASE("quadratic form floor", "[cov]") {
  CHECK(quadratic_form_floor(cov_of({{0, 0.4}}, 0.7), 100, 1) == Approx(1.0));
  CHECK(quadratic_form_floor(consecutive_cov({0, 0.3, 0.4, 1.0}, 0.5), 1000, 1) == Approx(1.0));
  CHECK(quadratic_form_floor(cov_of({{0, 0.2}, {0.5, 0.6}, {0.8, 1.0}}, 0.7), 10000, 4) > 0.0);
}

TEST_CASE("random configurations respect the determinant and eigenvalue upper bounds", "[cov]") {
  for (double h : {0.55, 0.75, 0.9}) {
    const auto r = check_random_configurations(HurstIndex(h), 1.0, 1000, 5);
    CHECK(r.configs == 1000);
    CHECK(r.sandwich_violations == 0);
    CHECK(r.bracket_violations == 0);
    CHECK(r.min_det_lower_ratio > 0.0);
    CHECK(r.max_det_upper_ratio <= 1.0 + 1e-9);
  }
}

TEST_CASE("increment covariance bound with unit constant", "[cov]") {
  // The unit-constant bound |E[(B_v - B_u) B_t]| <= t^{2H-1}|v - u| fails near
  // u, v -> t/2 for H > 1/2; see the sharp-constant case below.
  for (double h : {0.6, 0.75}) {
    const auto c = check_increment_covariance_bound(HurstIndex(h), 1.0, 100000, 7);
    INFO("H = " << h << " max ratio " << c.max_ratio);
    CHECK(c.violations_unit == 0);
  }
}

TEST_CASE("increment covariance bound with the sharp constant", "[cov]") {
  for (double hv : {0.55, 0.6, 0.75, 0.9}) {
    const HurstIndex h(hv);
    const double c = covariance_bound_constant(h);
    CHECK(c == Approx(hv * std::pow(2.0, 2 - 2 * hv)));
    const auto r = check_increment_covariance_bound(h, 1.0, 100000, 7);
    CHECK(r.violations_sharp == 0);
    CHECK(r.max_ratio <= c + 1e-12);
  }
  // Explicit counterexample to the unit constant: t = 1, [u, v] shrinking onto 1/2.
  const HurstIndex h(0.75);
  const double u = 0.5 - 1e-4, v = 0.5 + 1e-4;
  const double e = std::abs(fbm_covariance(h, v, 1) - fbm_covariance(h, u, 1));
  CHECK(e / (v - u) > 1.05);
}

TEST_CASE("factorisation errors for Brownian increments", "[cov]") {
  // Σ is diagonal, so θ2 = θ3 = 0. Σ' holds the merged windows, so θ1 and θ4
  // reduce to length ratios: θ1 = 1/(1+h) - 1 and θ4 = (1+h) - 1 on the merged entry.
  const double d = 0.125;
  const IncrementPartition part(3, {2}, d);
  const auto f = decomp_factorisation_check(step2_times(d), part, HurstIndex(0.5));
  CHECK(f.theta1 == Approx(1 / (1 + d) - 1).epsilon(1e-12));
  CHECK(f.theta2.at(0) == Approx(0.0).margin(1e-13));
  CHECK(f.theta4.at(0).at(0) == Approx(0.0).margin(1e-13));
  CHECK(f.theta4.at(1).at(1) == Approx(d).epsilon(1e-12));
  CHECK(f.theta4.at(0).at(1) == 0.0);
  CHECK(f.theta4.at(1).at(0) == 0.0);
  CHECK(f.cof_bound_ok);

  const IncrementPartition two(5, {2, 4}, 0.1);
  const auto g = decomp_factorisation_check({0, 1, 1.1, 2.1, 2.2, 3.2}, two, HurstIndex(0.5));
  CHECK(g.theta1 == Approx(1 / (1.1 * 1.1) - 1).epsilon(1e-12));
  CHECK(g.theta3.at(0).at(1) == Approx(0.0).margin(1e-13));
}

TEST_CASE("partition hypotheses are enforced", "[cov]") {
  CHECK_THROWS_AS(IncrementPartition(3, {1}, 0.1), DomainError);
  CHECK_THROWS_AS(IncrementPartition(4, {2, 3}, 0.1), DomainError);
  const IncrementPartition part(3, {2}, 0.1);
  CHECK_THROWS_AS(part.validate({0, 1, 1.5, 2.5}), DomainError);
  CHECK_NOTHROW(part.validate({0, 1, 1.1, 2.1}));
  CHECK(part.large() == std::vector<std::size_t>{1, 3});
}

TEST_CASE("factorisation errors shrink as h -> 0", "[cov]") {
  for (double hv : {0.6, 0.75}) {
    const HurstIndex h(hv);
    std::vector<double> t1, t2, t4;
    for (double d : kHGrid) {
      const auto f = decomp_factorisation_check(step2_times(d), IncrementPartition(3, {2}, d), h);
      CHECK(std::isfinite(f.theta1));
      CHECK(f.cof_bound_ok);
      t1.push_back(f.theta1);
      t2.push_back(f.theta2.at(0));
      double m4 = 0;
      for (const auto& row : f.theta4)
        for (double x : row) m4 = std::max(m4, std::abs(x));
      t4.push_back(m4);
    }
    CHECK(std::abs(t1.back()) < std::abs(t1.front()));
    const double target = 2 - 2 * hv;
    INFO("H = " << hv);
    CHECK(std::abs(log2_slope(kHGrid, t1) - target) <= 0.3);
    CHECK(std::abs(log2_slope(kHGrid, t2) - target) <= 0.3);
    CHECK(std::abs(log2_slope(kHGrid, t4) - target) <= 0.3);
  }
}

TEST_CASE("off-diagonal small-small inverse entries shrink as h -> 0", "[cov]") {
  const HurstIndex h(0.75);
  std::vector<double> t3;
  for (double d : kHGrid) {
    const std::vector<double> times{0, 1, 1 + d, 2 + d, 2 + 2 * d, 3 + 2 * d};
    const auto f = decomp_factorisation_check(times, IncrementPartition(5, {2, 4}, d), h);
    t3.push_back(f.theta3.at(0).at(1));
  }
  CHECK(std::abs(log2_slope(kHGrid, t3) - 0.5) <= 0.3);
}

TEST_CASE("ill-conditioned configurations are rejected", "[cov]") {
  const double d = 1e-14;
  CHECK_THROWS_AS(decomp_factorisation_check({0, 1, 1 + d, 2 + d}, IncrementPartition(3, {2}, 1e-13), HurstIndex(0.9)),
                  ConditioningError);
}
