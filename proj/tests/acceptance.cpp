// Acceptance runner: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <algorithm>
#include <chrono>
#include <functional>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fbmlab/bound_lab.h"
#include "fbmlab/gauss_cov.h"
#include "fbmlab/local_time.h"
#include "fbmlab/mc_harness.h"

using namespace fbmlab;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [x]");
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string csv(const RateReport& r) {
  std::ostringstream out;
  write_rate_csv(r, out);
  return out.str();
}

// Mean of x*y with standard error, variables centred at 0.
std::pair<double, double> product_moment(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0, s2 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    s += x[i] * y[i];
    s2 += x[i] * y[i] * x[i] * y[i];
  }
  const double n = static_cast<double>(x.size());
  const double m = s / n;
  return {m, std::sqrt((s2 / n - m * m) / n)};
}

Outcome generator_fidelity(unsigned threads) {
  Outcome o;
  for (double h : {0.55, 0.75, 0.9}) {
    const auto c = generator_autocovariance(HurstIndex(h), 1024, 100000, 10, 101, threads);
    double zmax = 0;
    for (double z : c.z) zmax = std::max(zmax, std::abs(z));
    o.require(c.pass, fmt("H=%.2f max|z|=%.2f", h, zmax));
  }
  // Exact against FFT on 64 nodes: every covariance entry within 4 combined standard errors.
  const HurstIndex h(0.75);
  const GridSpec g(64, 1.0);
  const FftSampler fft(h, g);
  auto nodes = g.nodes();
  nodes.erase(nodes.begin());
  const ExactSampler exact(h, nodes);
  const std::size_t paths = 100000;
  std::vector<std::vector<double>> fv(64, std::vector<double>(paths)), ev = fv;
  std::vector<double> buf(64);
  for (std::size_t r = 0; r < paths; ++r) {
    const auto p = sample_fft(fft, h, {102, r, 0}, 1);
    NormalStream ns({103, r, 0});
    exact.draw(ns, buf);
    for (std::size_t k = 0; k < 64; ++k) {
      fv[k][r] = p.values[0][k + 1];
      ev[k][r] = buf[k];
    }
  }
  std::size_t bad = 0;
  double zmax = 0;
  for (std::size_t i = 0; i < 64; ++i) {
    for (std::size_t j = i; j < 64; ++j) {
      const auto [mf, sf] = product_moment(fv[i], fv[j]);
      const auto [me, se] = product_moment(ev[i], ev[j]);
      const double z = std::abs(mf - me) / std::hypot(sf, se);
      zmax = std::max(zmax, z);
      bad += z > 4.0;
    }
  }
  o.require(bad == 0, fmt("exact vs fft 64 nodes: %zu of 2080 entries beyond 4 se, max z %.2f", bad, zmax));
  return o;
}

Outcome localtime_mean_oracle(unsigned threads) {
  Outcome o;
  for (double h : {0.51, 0.6, 0.75}) {
    const auto m = localtime_mean(HurstIndex(h), 4096, 1.0, 0.0, 10000, 201, threads);
    const double oracle = moment_oracle(HurstIndex(h), 1.0, 0.0, 1);
    const double rel = m.mean / oracle - 1;
    o.require(std::abs(rel) <= 0.05, fmt("H=%.2f mean %.4f oracle %.4f rel %+.2f%%", h, m.mean, oracle, 100 * rel));
  }
  return o;
}

Outcome second_moment_oracle() {
  Outcome o;
  const double v = moment_oracle(HurstIndex(0.5), 1.0, 0.0, 2);
  o.require(std::abs(v - 1.0) <= 1e-3, fmt("E L_1(0)^2 = %.8f", v));
  return o;
}

ExperimentPlan rate_plan(double h, ComponentPair pair, unsigned threads) {
  ExperimentPlan p;
  p.hurst = {h};
  p.ns = {64, 128, 256, 512, 1024, 2048};
  p.pair = pair;
  p.replicates = 1000;
  p.max_replicates = kMaxReplicates;
  p.auto_scale = true;
  p.master_seed = 301;
  p.threads = threads;
  return p;
}

Outcome rate_same_component(unsigned threads) {
  Outcome o;
  for (double h : {0.6, 0.75}) {
    const auto r = run_rate_experiment(rate_plan(h, {1, 1}, threads));
    const auto& f = r.fits.at(0);
    std::size_t maxm = 0;
    for (const auto& c : r.cells) maxm = std::max(maxm, c.replicates);
    o.require(f.fitted && f.pass, fmt("H=%.2f slope %.3f +- %.3f (bound %.3f, M<=%zu)", h, f.fit.slope,
                                      f.fit.half_width, -(1 - h) / 2 + 0.2, maxm));
  }
  return o;
}

Outcome rate_cross_component(unsigned threads) {
  Outcome o;
  for (double h : {0.6, 0.75}) {
    const auto r = run_rate_experiment(rate_plan(h, {1, 2}, threads));
    int decreasing = 0;
    std::string seq;
    for (std::size_t i = 0; i < r.cells.size(); ++i) {
      if (i > 0 && r.cells[i].l2_error < r.cells[i - 1].l2_error) ++decreasing;
      seq += fmt("%s%.4f", i ? "," : "", r.cells[i].l2_error);
    }
    o.require(decreasing >= 4, fmt("H=%.2f %d of 5 steps decreasing (%s)", h, decreasing, seq.c_str()));
  }
  return o;
}

Outcome level_decay(unsigned threads) {
  Outcome o;
  ExperimentPlan p;
  p.hurst = {0.75};
  p.ns = {128, 256, 512};
  p.replicates = 1000;
  p.master_seed = 601;
  p.threads = threads;
  const auto d = level_decay_check(p, 512, 0.0, 2.0);
  o.require(d.pass, fmt("a=0 %.4f +- %.4f, a=2 %.4f +- %.4f, M=%zu", d.low.l2_error, d.low.stderr_, d.high.l2_error,
                        d.high.stderr_, d.low.replicates));
  return o;
}

Outcome crossing_integral() {
  Outcome o;
  for (double theta : {0.5, 1.0, 2.0}) {
    const auto mc = lemma_a1_monte_carlo(theta, 1'000'000, 701);
    const double rel = mc.mean / lemma_a1_oracle(theta) - 1;
    o.require(std::abs(rel) <= 0.01, fmt("theta=%.1f rel %+.3f%%", theta, 100 * rel));
  }
  return o;
}

Outcome covariance_suite() {
  Outcome o;
  for (double h : {0.55, 0.75, 0.9}) {
    const auto c = check_increment_covariance_bound(HurstIndex(h), 1.0, 100000, 801);
    o.require(c.violations_unit == 0,
              fmt("H=%.2f unit-constant bound: %zu violations, max ratio %.4f (sharp constant %.4f: %zu violations)", h,
                  c.violations_unit, c.max_ratio, covariance_bound_constant(HurstIndex(h)), c.violations_sharp));
    const auto r = check_random_configurations(HurstIndex(h), 1.0, 1000, 802);
    o.require(r.sandwich_violations == 0, fmt("H=%.2f determinant upper bound: %zu violations", h, r.sandwich_violations));
    o.require(r.bracket_violations == 0, fmt("H=%.2f eigenvalue upper bracket: %zu violations", h, r.bracket_violations));
  }
  return o;
}

Outcome decoupling(unsigned threads) {
  Outcome o;
  const std::vector<double> grid{0x1p-2, 0x1p-3, 0x1p-4, 0x1p-5, 0x1p-6, 0x1p-7};
  for (double h : {0.6, 0.75}) {
    const auto t = theta1_scaling(HurstIndex(h), grid);
    o.require(t.pass, fmt("H=%.2f theta1 slope %.3f target %.3f", h, t.slope, t.target));
    DecouplingExperiment e;
    e.functional = Functional::step2_crossing;
    e.hurst = HurstIndex(h);
    e.mc_samples = 1'000'000;
    e.seed = 901;
    e.threads = threads;
    const auto s = decoupling_scaling(e, grid);
    o.require(s.status != VerdictStatus::fail,
              fmt("H=%.2f decoupling %s slope %.3f (bound %.3f)%s%s", h, to_string(s.status).c_str(), s.slope,
                  s.target - 0.4, s.reason.empty() ? "" : ": ", s.reason.c_str()));
  }
  return o;
}

Outcome determinism(unsigned threads) {
  Outcome o;
  const unsigned other = threads == 4 ? 2 : 4;
  ExperimentPlan p;
  p.hurst = {0.6, 0.75};
  p.ns = {32, 64, 128, 256};
  p.replicates = 100;
  p.master_seed = 1001;
  for (ComponentPair pair : {ComponentPair{1, 1}, ComponentPair{2, 1}}) {
    p.pair = pair;
    p.threads = threads;
    const auto a = csv(run_rate_experiment(p));
    p.threads = other;
    const auto b = csv(run_rate_experiment(p));
    o.require(a == b, fmt("rate pair %d%d threads %u vs %u", pair.i, pair.j, threads, other));
  }
  p.threads = threads;
  const auto a = csv(run_localtime_experiment(p));
  p.threads = other;
  o.require(a == csv(run_localtime_experiment(p)), fmt("localtime threads %u vs %u", threads, other));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fbmlab acceptance criteria"};
  int threads = 1;
  std::vector<int> only;
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--only", only, "run only these criteria");
  CLI11_PARSE(app, argc, argv);
  const auto th = static_cast<unsigned>(threads);

  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "generator fidelity", [&] { return generator_fidelity(th); }},
      {2, "local-time mean oracle", [&] { return localtime_mean_oracle(th); }},
      {3, "second-moment oracle", [] { return second_moment_oracle(); }},
      {4, "rate i=j", [&] { return rate_same_component(th); }},
      {5, "rate i!=j", [&] { return rate_cross_component(th); }},
      {6, "level decay", [&] { return level_decay(th); }},
      {7, "crossing integral oracle", [] { return crossing_integral(); }},
      {8, "covariance bound suite", [] { return covariance_suite(); }},
      {9, "decoupling scaling", [&] { return decoupling(th); }},
      {10, "determinism across threads", [&] { return determinism(th); }},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("error: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " " << c.name << ": " << o.detail
              << fmt(" (%.1f s)", secs) << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
