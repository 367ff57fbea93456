#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fbmlab/errors.h"
#include "fbmlab/fgn_engine.h"
#include "fbmlab/path_integrals.h"

using namespace fbmlab;
using Catch::Approx;

namespace {

FbmPath synthetic(double h, std::int64_t n, std::vector<double> values) {
  return FbmPath{HurstIndex(h), GridSpec(n, 1.0), {std::move(values)}};
}

double positive_part(double x) { return x > 0 ? x : 0.0; }

}  // namespace

TEST_CASE("integrand evaluation", "[integrand]") {
  const auto ind = SignedMeasure::indicator_above(0.0);
  CHECK(eval_integrand(ind, 1.0) == 1.0);
  CHECK(eval_integrand(ind, -1.0) == 0.0);
  CHECK(eval_integrand(ind, 0.0) == 0.0);
  CHECK(eval_integrand(SignedMeasure({}, 1.0), 3.0) == 1.0);
  CHECK(eval_integrand(SignedMeasure({{-1, 1}, {1, 1}}, 0.0), 0.0) == 0.0);
}

TEST_CASE("growth functional and total variation", "[integrand]") {
  const SignedMeasure mu({{0.0, -0.5}, {2.0, 1.0}}, 0.0);
  CHECK(mu.total_variation() == Approx(1.5));
  CHECK(mu.growth_functional(1.0) == Approx(0.5 + std::exp(-2.0)));
  CHECK_THROWS_AS(mu.growth_functional(0.0), DomainError);
}

TEST_CASE("density part is quantised into atoms", "[integrand]") {
  // g = 1 on [0, 1]: f(x) = 2x - 1 inside the support.
  std::vector<double> xs, g;
  for (int i = 0; i <= 200; ++i) {
    xs.push_back(i / 200.0);
    g.push_back(1.0);
  }
  const auto f = SignedMeasure::with_density({}, 0.0, xs, g, 1000);
  CHECK(f.atoms().size() <= 1000);
  CHECK(f.quantised_mass() == Approx(1.0));
  CHECK(f.total_variation() == Approx(1.0));
  CHECK(f.quantisation_sup_error() > 0.0);
  for (double x : {0.05, 0.3, 0.5, 0.77}) CHECK(std::abs(eval_integrand(f, x) - (2 * x - 1)) <= f.quantisation_sup_error() + 1e-12);
}

TEST_CASE("riemann sum examples", "[riemann]") {
  const auto p = synthetic(0.75, 4, {0.0, 0.3, -0.2, 0.5, 0.1});
  CHECK(riemann_sum(p, SignedMeasure::constant(1.0), {1, 1}, p.grid) == Approx(0.1));

  const auto below = synthetic(0.75, 4, {0.0, -0.3, -0.2, -0.5, -0.1});
  CHECK(riemann_sum(below, SignedMeasure::indicator_above(0.0), {1, 1}, below.grid) == 0.0);

  // n = 2: f(B_0)(B_1/2 - B_0) + f(B_1/2)(B_1 - B_1/2) with B = (0, 0.4, -0.1): 0 + 1 * (-0.5).
  const auto two = synthetic(0.75, 2, {0.0, 0.4, -0.1});
  CHECK(riemann_sum(two, SignedMeasure::indicator_above(0.0), {1, 1}, two.grid) == Approx(-0.5));
}

TEST_CASE("riemann sum on a coarser grid and with a partial step", "[riemann]") {
  const HurstIndex h(0.7);
  const GridSpec fine(2.0, 32, 0.9);
  const auto p = sample_fft(h, fine, 3, 1);
  const GridSpec coarse(2.0, 8, 0.9);
  // f = 1 telescopes to the terminal value on any compatible grid.
  CHECK(riemann_sum(p, SignedMeasure::constant(1.0), {1, 1}, coarse) == Approx(p.values[0].back()).epsilon(1e-12));
  double manual = 0;
  const auto& b = p.values[0];
  const auto ind = SignedMeasure::indicator_above(0.1);
  for (int k = 0; k < 7; ++k) manual += eval_integrand(ind, b[4 * k]) * (b[4 * k + 4] - b[4 * k]);
  manual += eval_integrand(ind, b[28]) * (b.back() - b[28]);
  CHECK(riemann_sum(p, ind, {1, 1}, coarse) == Approx(manual).epsilon(1e-12));
  CHECK_THROWS_AS(riemann_sum(p, ind, {1, 1}, GridSpec(2.0, 64, 0.9)), AlignmentError);
  CHECK_THROWS_AS(riemann_sum(p, ind, {1, 1}, GridSpec(2.0, 12, 0.9)), AlignmentError);
}

TEST_CASE("riemann sum is additive in the measure", "[riemann]") {
  const auto p = sample_fft(HurstIndex(0.75), GridSpec(256, 1.0), 9, 2);
  const SignedMeasure m1({{0.1, 0.3}, {-0.4, -1.2}}, 0.25);
  const SignedMeasure m2({{0.0, 0.7}}, -1.0);
  const SignedMeasure both({{0.1, 0.3}, {-0.4, -1.2}, {0.0, 0.7}}, -0.75);
  for (ComponentPair pair : {ComponentPair{1, 1}, ComponentPair{1, 2}, ComponentPair{2, 1}}) {
    const double lhs = riemann_sum(p, both, pair, GridSpec(64, 1.0));
    const double rhs = riemann_sum(p, m1, pair, GridSpec(64, 1.0)) + riemann_sum(p, m2, pair, GridSpec(64, 1.0));
    CHECK(std::abs(lhs - rhs) <= 1e-12);
  }
}

TEST_CASE("reference integral", "[reference]") {
  const auto p = sample_fft(HurstIndex(0.75), GridSpec(64 * 256, 1.0), 4, 2);
  CHECK(reference_integral(p, SignedMeasure::constant(1.0), {1, 2}, 256) == Approx(p.values[1].back()).epsilon(1e-12));
  CHECK_THROWS_AS(reference_integral(p, SignedMeasure::constant(1.0), {1, 1}, 8), RefinementError);
  CHECK_THROWS_AS(reference_integral(p, SignedMeasure::constant(1.0), {1, 1}, 48), RefinementError);
}

TEST_CASE("reference integral is self-convergent under refinement", "[reference]") {
  const HurstIndex h(0.75);
  const auto p = sample_fft(h, GridSpec(64 * 512, 1.0), 17, 1);
  const auto f = SignedMeasure::indicator_above(0.0);
  const double r256 = riemann_sum(p, f, {1, 1}, GridSpec(64 * 256, 1.0));
  const double r512 = reference_integral(p, f, {1, 1}, 512);
  CHECK(std::abs(r512 - r256) < 1e-2);
}

TEST_CASE("sign change error examples", "[signchange]") {
  const auto flat = synthetic(0.75, 4, {0.0, -0.1, -0.3, -0.2, -0.5});
  CHECK(sign_change_error(flat, 0.0, flat.grid) == 0.0);
  const auto one = synthetic(0.75, 1, {0.0, 0.5});
  CHECK(sign_change_error(one, 0.0, one.grid) == Approx(0.5));
  const auto g2 = synthetic(0.75, 4, {0.0, 0.2, -0.1, 0.3, 0.4});
  CHECK(sign_change_error(g2, 0.0, g2.grid) == Approx(std::pow(4.0, 0.5) * (0.2 + 0.1 + 0.3)));

  const SignedMeasure two({{0.0, 0.5}, {0.25, 1.5}}, 0.5);
  CHECK(closed_form_error(g2, two, g2.grid) ==
        Approx(2 * 0.5 * sign_change_error(g2, 0.0, g2.grid) + 2 * 1.5 * sign_change_error(g2, 0.25, g2.grid)));
}

TEST_CASE("sign change error matches the change of variable identity", "[signchange]") {
  for (double hv : {0.6, 0.75}) {
    const HurstIndex h(hv);
    const GridSpec g(2.0, 64, 0.93);
    const FftSampler sampler(h, g);
    for (std::uint64_t r = 0; r < 100; ++r) {
      const auto p = sample_fft(sampler, h, {5, r, 0}, 1);
      const double a = 0.1 * static_cast<double>(r % 7) - 0.3;
      const auto& b = p.values[0];
      const double lhs = positive_part(b.back() - a) - positive_part(b.front() - a);
      const double riemann = riemann_sum(p, SignedMeasure::indicator_above(a), {1, 1}, g);
      const double expected = std::pow(64.0, 2 * hv - 1) * (lhs - riemann);
      CHECK(std::abs(sign_change_error(p, a, g) - expected) <= 1e-10);
    }
  }
}

TEST_CASE("fine minus coarse riemann sums equal the closed-form error difference", "[signchange]") {
  const HurstIndex h(0.75);
  const std::int64_t n = 64, ff = 32;
  const auto p = sample_fft(h, GridSpec(n * ff, 1.0), 8, 1);
  const auto f = SignedMeasure::indicator_above(0.2);
  const auto s = make_error_sample(p, f, {1, 1}, n, ff);
  const double scale = std::pow(static_cast<double>(n), 2 * 0.75 - 1);
  const double fine_part = scale * std::pow(static_cast<double>(n * ff), 1 - 2 * 0.75) *
                           sign_change_error(p, 0.2, p.grid);
  CHECK(s.s_n == Approx(scale * (s.reference - s.riemann)).epsilon(1e-12));
  CHECK(std::abs(s.s_n - (sign_change_error(p, 0.2, GridSpec(n, 1.0)) - fine_part)) <= 1e-10);
}

TEST_CASE("fine-grid reference agrees with the closed form at fine factor 256", "[signchange]") {
  const HurstIndex h(0.75);
  const std::int64_t n = 64, ff = 256;
  const GridSpec fine(n * ff, 1.0);
  const FftSampler sampler(h, fine);
  const auto f = SignedMeasure::indicator_above(0.0);
  int close = 0, counted = 0;
  for (std::uint64_t r = 0; r < 1000; ++r) {
    const auto p = sample_fft(sampler, h, {6, r, 0}, 1);
    const double closed = sign_change_error(p, 0.0, GridSpec(n, 1.0));
    if (closed == 0.0) continue;
    const double s_n = make_error_sample(p, f, {1, 1}, n, ff).s_n;
    ++counted;
    if (std::abs(s_n - closed) <= 0.005 * std::abs(closed)) ++close;
  }
  INFO(close << " of " << counted << " paths within 0.5%");
  CHECK(close >= 0.95 * counted);
}
