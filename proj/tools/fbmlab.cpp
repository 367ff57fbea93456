// fbmlab: command-line entry point.
//
// Exit codes: 0 success, 1 validation error or failed verification,
// 2 statistically inconclusive verification.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fbmlab/bound_lab.h"
#include "fbmlab/errors.h"
#include "fbmlab/gauss_cov.h"
#include "fbmlab/io.h"
#include "fbmlab/local_time.h"
#include "fbmlab/mc_harness.h"
#include "fbmlab/parallel.h"
#include "run_config.h"

#ifndef FBMLAB_VERSION
#define FBMLAB_VERSION "unknown"
#endif

namespace {

using namespace fbmlab;
using cli::KeyValues;
using cli::RunConfig;
using nlohmann::json;

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kInconclusive = 2;

const std::vector<double> kDefaultHGrid{0.25, 0.125, 0.0625, 0.03125, 0.015625, 0.0078125};

struct Session {
  RunConfig cfg;
  unsigned threads = 1;
  bool quiet = false;
  std::vector<std::string> outputs;
  json summary = json::object();

  void note(const std::string& msg) const {
    if (!quiet) std::cerr << msg << '\n';
  }

  // Into output_dir when given, else to stdout.
  void emit(const std::string& name, const std::string& contents) {
    if (cfg.output_dir.empty()) {
      std::cout << contents;
      return;
    }
    io::write_atomically(std::filesystem::path(cfg.output_dir) / name, contents);
    outputs.push_back(name);
  }
};

std::string num(double x) { return std::isnan(x) ? "nan" : io::g17(x); }

int simulate(Session& s) {
  const auto& kv = s.cfg.values;
  const HurstIndex h(cli::get_double(kv, "H", 0.75));
  const double T = cli::get_double(kv, "T", 1.0);
  const GridSpec grid(T, cli::get_int(kv, "n", 1024), cli::get_double(kv, "t", T));
  const auto comps = static_cast<int>(cli::get_int(kv, "components", 1));
  const std::string method = cli::get_string(kv, "method", "fft");
  FbmPath path = [&] {
    if (method == "fft") return sample_fft(h, grid, s.cfg.master_seed, comps);
    if (method == "exact") return sample_exact(h, grid, s.cfg.master_seed, comps);
    throw PlanError("method must be fft or exact");
  }();
  std::ostringstream out;
  write_path_csv(path, out);
  s.emit("path.csv", out.str());
  return kOk;
}

int localtime(Session& s) {
  const auto& kv = s.cfg.values;
  const HurstIndex h(cli::get_double(kv, "H", 0.75));
  const auto n = cli::get_int(kv, "n", 1024);
  const double T = cli::get_double(kv, "T", 1.0);
  const double t = cli::get_double(kv, "t", T);
  const auto levels = cli::get_doubles(kv, "levels", {0.0});
  const std::string est = cli::get_string(kv, "estimator", "sign");
  if (est != "bin" && est != "sign") throw PlanError("estimator must be bin or sign");
  const double eps = cli::get_double(kv, "eps", default_eps(h, n));
  const auto paths = cli::get_int(kv, "paths", 1);
  if (paths < 1) throw PlanError("paths must be >= 1");
  if (est == "sign") h.require_theorem_scope("sign-change estimator");

  const GridSpec grid(T, n, t);
  const FftSampler sampler(h, grid);
  const auto m = static_cast<std::size_t>(paths);
  std::vector<std::vector<double>> values(levels.size(), std::vector<double>(m));
  std::vector<char> unresolved(m, 0);
  parallel_for(m, s.threads, [&](std::size_t r) {
    const FbmPath path = sample_fft(sampler, h, StreamKey{s.cfg.master_seed, r, 0}, 1);
    for (std::size_t i = 0; i < levels.size(); ++i) {
      if (est == "sign") {
        values[i][r] = sign_change_estimator(path, levels[i], grid, t);
      } else {
        const auto b = binning_estimator(path, levels[i], eps, t);
        values[i][r] = b.value;
        if (!b.resolved) unresolved[r] = 1;
      }
    }
  });
  if (std::find(unresolved.begin(), unresolved.end(), 1) != unresolved.end())
    s.note("warning: eps is below 4 n^-H; binning is under-resolved");

  std::ostringstream out;
  out << "a,estimate,stderr,estimator,n,H,t\n";
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const double mean = pairwise_sum(values[i]) / static_cast<double>(m);
    double se = NAN;
    if (m > 1) {
      std::vector<double> dev(m);
      for (std::size_t r = 0; r < m; ++r) dev[r] = (values[i][r] - mean) * (values[i][r] - mean);
      se = std::sqrt(pairwise_sum(dev) / static_cast<double>(m - 1) / static_cast<double>(m));
    }
    out << num(levels[i]) << ',' << num(mean) << ',' << num(se) << ',' << est << ',' << n << ',' << num(h.value())
        << ',' << num(t) << '\n';
  }
  s.emit("localtime.csv", out.str());
  return kOk;
}

int rate(Session& s) {
  const ExperimentPlan plan = cli::plan_from_config(s.cfg, s.threads);
  const std::string kind = cli::get_string(s.cfg.values, "experiment", "rate");
  RateReport report;
  if (kind == "rate") {
    report = run_rate_experiment(plan);
  } else if (kind == "localtime") {
    report = run_localtime_experiment(plan);
  } else {
    throw PlanError("experiment must be rate or localtime");
  }
  std::ostringstream out;
  write_rate_csv(report, out);
  s.emit("rate.csv", out.str());

  int code = kOk;
  json fits = json::array();
  for (const HurstFit& f : report.fits) {
    json j{{"H", f.hurst}, {"fitted", f.fitted}, {"degenerate", f.degenerate}, {"pass", f.pass}};
    if (f.fitted) {
      j["slope"] = f.fit.slope;
      j["half_width"] = f.fit.half_width;
      j["intercept"] = f.fit.intercept;
      j["residuals"] = f.fit.residuals;
      s.note("H=" + io::shortest(f.hurst) + " slope " + io::g17(f.fit.slope) + (f.pass ? " PASS" : " FAIL"));
      if (!f.pass) code = kFailed;
    } else if (f.degenerate) {
      s.note("H=" + io::shortest(f.hurst) + ": all errors are zero, no rate to fit");
    } else {
      s.note("H=" + io::shortest(f.hurst) + ": fewer than 3 usable cells, inconclusive");
      if (code == kOk) code = kInconclusive;
    }
    fits.push_back(j);
  }
  s.summary["fits"] = fits;
  s.summary["unusable_cells"] = std::count_if(report.cells.begin(), report.cells.end(),
                                              [](const RateCell& c) { return !c.usable; });
  return code;
}

struct Rows {
  std::ostringstream out;
  Rows() { out << "check,param_h,H,value\n"; }
  void add(const std::string& check, double param, double hurst, double value) {
    out << check << ',' << num(param) << ',' << num(hurst) << ',' << num(value) << '\n';
  }
};

int verify_bounds(Session& s) {
  const auto& kv = s.cfg.values;
  const std::string suite = cli::get_string(kv, "suite", "cov");
  const auto hs = cli::get_doubles(kv, "H", {0.6, 0.75});
  const auto h_grid = cli::get_doubles(kv, "h_grid", kDefaultHGrid);
  const std::uint64_t seed = s.cfg.master_seed;
  Rows rows;
  bool failed = false, inconclusive = false;

  if (suite == "cov") {
    const auto trials = static_cast<std::size_t>(cli::get_int(kv, "trials", 100'000));
    const auto configs = static_cast<std::size_t>(cli::get_int(kv, "configs", 1000));
    for (double hv : hs) {
      const HurstIndex h(hv);
      const auto bound = check_increment_covariance_bound(h, 1.0, trials, seed);
      rows.add("cov_bound_unit_violations", NAN, hv, static_cast<double>(bound.violations_unit));
      rows.add("cov_bound_sharp_violations", NAN, hv, static_cast<double>(bound.violations_sharp));
      rows.add("cov_bound_max_ratio", NAN, hv, bound.max_ratio);
      const auto conf = check_random_configurations(h, 1.0, configs, seed);
      rows.add("sandwich_violations", NAN, hv, static_cast<double>(conf.sandwich_violations));
      rows.add("eigen_bracket_violations", NAN, hv, static_cast<double>(conf.bracket_violations));
      const auto th = theta1_scaling(h, h_grid);
      for (std::size_t i = 0; i < th.h.size(); ++i) rows.add("theta1", th.h[i], hv, th.theta1[i]);
      rows.add("theta1_slope", NAN, hv, th.slope);
      failed = failed || bound.violations_unit > 0 || conf.sandwich_violations > 0 || conf.bracket_violations > 0 ||
               !th.pass;
      if (bound.violations_unit > 0)
        s.note("H=" + io::shortest(hv) + ": unit-constant covariance bound violated in " +
               std::to_string(bound.violations_unit) + " of " + std::to_string(trials) + " triples");
    }
  } else if (suite == "decoupling") {
    DecouplingExperiment base;
    base.functional = functional_from_string(cli::get_string(kv, "functional", "step2"));
    base.a = cli::get_double(kv, "a", 0.0);
    base.mc_samples = static_cast<std::size_t>(cli::get_int(kv, "samples", 1'000'000));
    base.seed = seed;
    base.threads = s.threads;
    for (double hv : hs) {
      base.hurst = HurstIndex(hv);
      const auto rep = decoupling_scaling(base, h_grid);
      for (const auto& r : rep.rows) {
        rows.add("relative_discrepancy", r.h, hv, r.relative);
        rows.add("relative_stderr", r.h, hv, r.relative_se);
      }
      rows.add("decoupling_slope", NAN, hv, rep.status == VerdictStatus::inconclusive ? NAN : rep.slope);
      rows.add("decoupling_status", NAN, hv, static_cast<double>(rep.status));
      s.note("H=" + io::shortest(hv) + ": " + to_string(rep.status) + " (" + rep.reason + ")");
      failed = failed || rep.status == VerdictStatus::fail;
      inconclusive = inconclusive || rep.status == VerdictStatus::inconclusive;
    }
  } else if (suite == "lemmas") {
    const auto samples = static_cast<std::size_t>(cli::get_int(kv, "samples", 1'000'000));
    for (double th : cli::get_doubles(kv, "thetas", {0.5, 1.0, 2.0})) {
      const auto mc = lemma_a1_monte_carlo(th, samples, seed);
      const double exact = lemma_a1_oracle(th);
      rows.add("a1_monte_carlo", th, NAN, mc.mean);
      rows.add("a1_oracle", th, NAN, exact);
      failed = failed || std::abs(mc.mean - exact) > 0.01 * exact;
    }
    for (auto [t1, t2] : {std::pair{1.0, 1.0}, std::pair{3.0, 0.1}}) {
      const auto a2 = lemma_a2_check(t1, t2, std::max<std::size_t>(samples, 100'000), seed);
      rows.add("a2_lhs1", t2, NAN, a2.lhs1.mean);
      rows.add("a2_lhs2", t1 * t2, NAN, a2.lhs2.mean);
      failed = failed || !a2.pass;
    }
    const auto ns = cli::get_ints(kv, "a3_ns", {16, 32, 64, 128, 256, 512});
    for (double hv : hs) {
      const auto a3 = lemma_a3_decay(HurstIndex(hv), cli::get_double(kv, "a", 0.0), 1.0, ns);
      for (const auto& p : a3.points) rows.add("a3_integral", static_cast<double>(p.n), hv, p.value);
      rows.add("a3_slope", NAN, hv, a3.slope);
      failed = failed || !a3.pass;
    }
  } else {
    throw PlanError("suite must be cov, decoupling or lemmas");
  }
  s.emit("verify.csv", rows.out.str());
  if (failed) return kFailed;
  return inconclusive ? kInconclusive : kOk;
}

int oracle(Session& s) {
  const auto& kv = s.cfg.values;
  const std::string lemma = cli::get_string(kv, "lemma", "a1");
  double value = 0.0;
  if (lemma == "a1") {
    value = lemma_a1_oracle(cli::get_double(kv, "theta", 1.0));
  } else if (lemma == "moments") {
    value = moment_oracle(HurstIndex(cli::get_double(kv, "H", 0.5)), cli::get_double(kv, "t", 1.0),
                          cli::get_double(kv, "a", 0.0), static_cast<int>(cli::get_int(kv, "p", 1)));
  } else {
    throw PlanError("lemma must be a1 or moments");
  }
  s.emit("oracle.txt", io::shortest(value) + "\n");
  return kOk;
}

void write_manifest(Session& s, int code, double seconds) {
  json m{{"subcommand", s.cfg.subcommand},
         {"config", s.cfg.values},
         {"config_text", cli::format_config(s.cfg.values)},
         {"master_seed", s.cfg.master_seed},
         {"threads", s.threads},
         {"version", FBMLAB_VERSION},
         {"wall_time_s", seconds},
         {"exit_code", code},
         {"outputs", s.outputs}};
  if (s.cfg.config_path) m["config_path"] = *s.cfg.config_path;
  if (!s.summary.empty()) m["summary"] = s.summary;
  io::write_atomically(std::filesystem::path(s.cfg.output_dir) / "manifest.json", m.dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fbmlab: fractional Brownian motion integrals, local times and bound checks"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  int threads = 0;
  bool quiet = false;
  std::string out_dir;
  app.add_option("--threads", threads, "worker threads (0: FBMLAB_THREADS or hardware)");
  app.add_flag("--quiet", quiet, "stdout carries machine-readable output only");
  app.add_option("--out", out_dir, "output directory; files are written atomically with a manifest");

  std::map<std::string, KeyValues> overrides;
  std::map<std::string, std::string> config_paths;
  auto sub = [&](const std::string& name, const std::string& desc,
                 const std::vector<std::pair<std::string, std::string>>& flags) {
    CLI::App* c = app.add_subcommand(name, desc);
    c->add_option("--config", config_paths[name], "flat key = value config file");
    for (const auto& [flag, key] : flags) c->add_option("--" + flag, overrides[name][key]);
    return c;
  };
  sub("simulate", "sample an fBm path to CSV",
      {{"H", "H"}, {"n", "n"}, {"T", "T"}, {"t", "t"}, {"components", "components"}, {"seed", "seed"},
       {"method", "method"}});
  sub("localtime", "local-time estimates at given levels",
      {{"H", "H"}, {"n", "n"}, {"T", "T"}, {"t", "t"}, {"levels", "levels"}, {"estimator", "estimator"},
       {"eps", "eps"}, {"paths", "paths"}, {"seed", "seed"}});
  sub("rate", "L2 error rates of the Riemann-sum or local-time estimator",
      {{"seed", "seed"}, {"pair", "pair"}, {"experiment", "experiment"}});
  sub("verify-bounds", "covariance, decoupling and lemma checks",
      {{"suite", "suite"}, {"H", "H"}, {"h-grid", "h_grid"}, {"samples", "samples"}, {"trials", "trials"},
       {"configs", "configs"}, {"functional", "functional"}, {"a", "a"}, {"seed", "seed"}});
  sub("oracle", "closed-form and quadrature oracles",
      {{"lemma", "lemma"}, {"theta", "theta"}, {"H", "H"}, {"t", "t"}, {"a", "a"}, {"p", "p"}});

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kFailed;
  }

  const auto started = std::chrono::steady_clock::now();
  Session s;
  s.quiet = quiet;
  int code = kFailed;
  try {
    const std::string name = app.get_subcommands().front()->get_name();
    KeyValues given;
    for (const auto& [k, v] : overrides[name])
      if (!v.empty()) given[k] = v;
    const auto& path = config_paths[name];
    s.cfg = cli::make_run_config(name, path.empty() ? std::nullopt : std::optional(path), given, out_dir);
    s.threads = resolve_threads(threads);
    if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
    if (name == "simulate") code = simulate(s);
    else if (name == "localtime") code = localtime(s);
    else if (name == "rate") code = rate(s);
    else if (name == "verify-bounds") code = verify_bounds(s);
    else code = oracle(s);
  } catch (const fbmlab::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailed;
  }
  if (!out_dir.empty()) {
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    write_manifest(s, code, secs);
  }
  return code;
}
