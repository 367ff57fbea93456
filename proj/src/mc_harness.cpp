#include "fbmlab/mc_harness.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>

#include "fbmlab/errors.h"
#include "fbmlab/io.h"
#include "fbmlab/local_time.h"
#include "fbmlab/parallel.h"

namespace fbmlab {

std::string to_string(ReferenceKind k) { return k == ReferenceKind::fine_sign_change ? "fine_sign_change" : "fine_riemann"; }

ReferenceKind reference_kind_from_string(const std::string& s) {
  if (s == "fine_sign_change") return ReferenceKind::fine_sign_change;
  if (s == "fine_riemann") return ReferenceKind::fine_riemann;
  throw PlanError("unknown reference kind '" + s + "'");
}

std::int64_t integral_fine_factor(HurstIndex h) {
  h.require_theorem_scope("integral reference");
  const double want = std::pow(100.0, 1.0 / (2.0 * h.value() - 1.0));
  std::int64_t f = 16;
  while (f < 256 && static_cast<double>(f) < want) f *= 2;
  return f;
}

namespace {

bool is_power_of_two(std::int64_t n) { return n > 0 && (n & (n - 1)) == 0; }

int components_of(const ComponentPair& p) { return std::max(p.i, p.j); }

std::int64_t fine_factor_for(const ExperimentPlan& plan, HurstIndex h, bool integral_reference) {
  if (plan.fine_factor != 0) return plan.fine_factor;
  return integral_reference ? integral_fine_factor(h) : kLocalTimeFineFactor;
}

bool uses_riemann(const ExperimentPlan& plan) {
  return plan.pair.i != plan.pair.j || plan.reference == ReferenceKind::fine_riemann;
}

RateCell summarise(double hurst, std::int64_t n, const std::vector<double>& errors) {
  const std::size_t m = errors.size();
  std::vector<double> sq(m);
  for (std::size_t r = 0; r < m; ++r) sq[r] = errors[r] * errors[r];
  const double mean_sq = pairwise_sum(sq) / static_cast<double>(m);
  RateCell cell;
  cell.hurst = hurst;
  cell.n = n;
  cell.replicates = m;
  cell.l2_error = std::sqrt(mean_sq);
  if (cell.l2_error > 0.0 && m > 1) {
    std::vector<double> dev(m);
    for (std::size_t r = 0; r < m; ++r) dev[r] = (sq[r] - mean_sq) * (sq[r] - mean_sq);
    const double sd = std::sqrt(pairwise_sum(dev) / static_cast<double>(m - 1));
    cell.stderr_ = sd / (std::sqrt(static_cast<double>(m)) * 2.0 * cell.l2_error);
  }
  cell.usable = cell.stderr_ <= cell.l2_error;
  return cell;
}

// errors(path, out) fills one error per n for a replicate's fine path.
using ReplicateErrors = std::function<void(const FbmPath&, std::vector<double>&)>;

// Runs replicates in batches until every cell with nonzero error has
// stderr <= 10% of its l2 error or the cap is reached.
std::vector<RateCell> run_cells(const ExperimentPlan& plan, HurstIndex h, const GridSpec& fine, int components,
                                const std::vector<std::int64_t>& ns, const ReplicateErrors& errors) {
  const FftSampler sampler(h, fine);
  const unsigned threads = std::max(1u, plan.threads);
  std::vector<std::vector<double>> per_rep;  // [replicate][n index]
  std::size_t target = std::min(plan.replicates, plan.max_replicates);
  std::vector<RateCell> cells;
  for (;;) {
    const std::size_t start = per_rep.size();
    per_rep.resize(target, std::vector<double>(ns.size()));
    parallel_for(target - start, threads, [&](std::size_t k) {
      const std::size_t r = start + k;
      const FbmPath path = sample_fft(sampler, h, StreamKey{plan.master_seed, r, 0}, components);
      errors(path, per_rep[r]);
    });
    cells.clear();
    double need = static_cast<double>(target);
    for (std::size_t i = 0; i < ns.size(); ++i) {
      std::vector<double> e(target);
      for (std::size_t r = 0; r < target; ++r) e[r] = per_rep[r][i];
      cells.push_back(summarise(h.value(), ns[i], e));
      const RateCell& c = cells.back();
      if (c.l2_error > 0.0 && c.stderr_ > 0.1 * c.l2_error)
        need = std::max(need, static_cast<double>(target) * std::pow(c.stderr_ / (0.1 * c.l2_error), 2.0) * 1.1);
    }
    if (!plan.auto_scale || need <= static_cast<double>(target) || target >= plan.max_replicates) break;
    target = std::min(plan.max_replicates, std::max(2 * target, static_cast<std::size_t>(std::ceil(need))));
  }
  return cells;
}

HurstFit fit_cells(double hurst, const std::vector<RateCell>& cells) {
  HurstFit out;
  out.hurst = hurst;
  out.degenerate = std::all_of(cells.begin(), cells.end(), [](const RateCell& c) { return c.l2_error == 0.0; });
  std::vector<RatePoint> pts;
  for (const RateCell& c : cells)
    if (c.usable && c.l2_error > 0.0) pts.push_back({static_cast<double>(c.n), c.l2_error, c.stderr_});
  if (out.degenerate || pts.size() < 3) return out;
  out.fit = fit_rate(pts);
  out.fitted = true;
  out.pass = out.fit.slope <= -(1.0 - hurst) / 2.0 + 0.2;
  return out;
}

}  // namespace

void ExperimentPlan::validate() const {
  if (hurst.empty()) throw PlanError("plan needs at least one Hurst value");
  for (double hv : hurst) HurstIndex(hv).require_theorem_scope("rate experiment");
  if (ns.size() < 3) throw PlanError("plan needs at least 3 grid sizes");
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (!is_power_of_two(ns[i]) || ns[i] < 2) throw PlanError("grid sizes must be powers of two >= 2");
    if (i > 0 && ns[i] <= ns[i - 1]) throw PlanError("grid sizes must increase strictly");
  }
  if (ns.back() < 4 * ns.front()) throw PlanError("grid sizes must span at least 2 octaves");
  if (!(t > 0.0) || !std::isfinite(t)) throw PlanError("t must be positive");
  if (pair.i < 1 || pair.i > 2 || pair.j < 1 || pair.j > 2) throw PlanError("component pair must use components 1 or 2");
  if (replicates < 2) throw PlanError("at least 2 replicates required");
  if (max_replicates < replicates || max_replicates > kMaxReplicates)
    throw PlanError("max_replicates must lie in [replicates, 10000]");
  if (fine_factor != 0 && (fine_factor < kMinFineFactor || !is_power_of_two(fine_factor)))
    throw PlanError("fine_factor must be a power of two >= 16");
  if (!std::isfinite(level)) throw PlanError("level must be finite");
  for (double hv : hurst) {
    const HurstIndex h(hv);
    const double ff = static_cast<double>(fine_factor_for(*this, h, uses_riemann(*this)));
    const double values = static_cast<double>(max_replicates) * static_cast<double>(ns.back()) * ff * t *
                          static_cast<double>(components_of(pair));
    if (values > budget)
      throw PlanError("plan exceeds the path-value budget: " + io::g17(values) + " > " + io::g17(budget));
  }
}

RateReport run_rate_experiment(const ExperimentPlan& plan) {
  plan.validate();
  RateReport report;
  const bool riemann = uses_riemann(plan);
  const int comps = components_of(plan.pair);
  for (double hv : plan.hurst) {
    const HurstIndex h(hv);
    const std::int64_t ff = fine_factor_for(plan, h, riemann);
    const GridSpec fine(plan.ns.back() * ff, plan.t);
    const bool diagonal = plan.pair.i == plan.pair.j;
    const auto& f = plan.integrand;
    auto errors = [&](const FbmPath& path, std::vector<double>& out) {
      const double limit = diagonal ? closed_form_error(path, f, path.grid, plan.pair.i) : 0.0;
      double reference = 0.0;
      if (riemann) reference = reference_integral(path, f, plan.pair, fine.points_per_unit() / plan.ns.front());
      for (std::size_t i = 0; i < plan.ns.size(); ++i) {
        const GridSpec coarse(plan.ns[i], plan.t);
        double s_n;
        if (riemann) {
          const double scale = std::pow(static_cast<double>(plan.ns[i]), 2.0 * hv - 1.0);
          s_n = scale * (reference - riemann_sum(path, f, plan.pair, coarse));
        } else {
          s_n = closed_form_error(path, f, coarse, plan.pair.i);
        }
        out[i] = s_n - limit;
      }
    };
    auto cells = run_cells(plan, h, fine, comps, plan.ns, errors);
    report.fits.push_back(fit_cells(hv, cells));
    report.cells.insert(report.cells.end(), cells.begin(), cells.end());
  }
  return report;
}

RateReport run_localtime_experiment(const ExperimentPlan& plan) {
  plan.validate();
  RateReport report;
  for (double hv : plan.hurst) {
    const HurstIndex h(hv);
    const std::int64_t ff = plan.fine_factor != 0 ? plan.fine_factor : kLocalTimeFineFactor;
    const GridSpec fine(plan.ns.back() * ff, plan.t);
    auto errors = [&](const FbmPath& path, std::vector<double>& out) {
      const double reference = sign_change_estimator(path, plan.level, fine, plan.t);
      for (std::size_t i = 0; i < plan.ns.size(); ++i) {
        const GridSpec coarse(plan.ns[i], plan.t);
        out[i] = sign_change_estimator(path, plan.level, coarse, plan.t) - reference;
      }
    };
    auto cells = run_cells(plan, h, fine, 1, plan.ns, errors);
    report.fits.push_back(fit_cells(hv, cells));
    report.cells.insert(report.cells.end(), cells.begin(), cells.end());
  }
  return report;
}

LevelDecay level_decay_check(const ExperimentPlan& plan, std::int64_t n, double a_low, double a_high) {
  if (plan.hurst.size() != 1) throw PlanError("level decay check takes exactly one Hurst value");
  const HurstIndex h(plan.hurst.front());
  h.require_theorem_scope("level decay check");
  if (!is_power_of_two(n)) throw PlanError("grid size must be a power of two");
  const std::int64_t ff = plan.fine_factor != 0 ? plan.fine_factor : kLocalTimeFineFactor;
  const GridSpec fine(n * ff, plan.t);
  const GridSpec coarse(n, plan.t);
  auto errors = [&](const FbmPath& path, std::vector<double>& out) {
    out[0] = sign_change_estimator(path, a_low, coarse, plan.t) - sign_change_estimator(path, a_low, fine, plan.t);
    out[1] = sign_change_estimator(path, a_high, coarse, plan.t) - sign_change_estimator(path, a_high, fine, plan.t);
  };
  const auto cells = run_cells(plan, h, fine, 1, {n, n}, errors);
  LevelDecay out{cells[0], cells[1], false};
  out.pass = out.high.l2_error < out.low.l2_error;
  return out;
}

MeanEstimate localtime_mean(HurstIndex h, std::int64_t n, double t, double a, std::size_t paths,
                            std::uint64_t seed, unsigned threads) {
  if (paths < 2) throw PlanError("at least 2 paths required");
  const GridSpec grid(n, t);
  const FftSampler sampler(h, grid);
  std::vector<double> v(paths), sq(paths);
  parallel_for(paths, std::max(1u, threads), [&](std::size_t r) {
    const FbmPath path = sample_fft(sampler, h, StreamKey{seed, r, 0}, 1);
    v[r] = sign_change_estimator(path, a, grid, t);
    sq[r] = v[r] * v[r];
  });
  const double m = static_cast<double>(paths);
  const double mean = pairwise_sum(v) / m;
  const double var = std::max(0.0, (pairwise_sum(sq) / m - mean * mean) * m / (m - 1.0));
  return {mean, std::sqrt(var / m)};
}

AutocovarianceCheck generator_autocovariance(HurstIndex h, std::int64_t n, std::size_t paths, int max_lag,
                                             std::uint64_t seed, unsigned threads) {
  if (paths < 2) throw PlanError("at least 2 paths required");
  if (max_lag < 0 || max_lag >= n) throw DomainError("max_lag must lie in [0, n)");
  const GridSpec grid(n, 1.0);
  const FftSampler sampler(h, grid);
  const auto lags = static_cast<std::size_t>(max_lag) + 1;
  std::vector<std::vector<double>> per_path(lags, std::vector<double>(paths));
  const double scale = std::pow(static_cast<double>(n), h.value());
  parallel_for(paths, std::max(1u, threads), [&](std::size_t r) {
    const FbmPath path = sample_fft(sampler, h, StreamKey{seed, r, 0}, 1);
    const auto& b = path.values[0];
    std::vector<double> x(static_cast<std::size_t>(n));
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = (b[k + 1] - b[k]) * scale;
    for (std::size_t l = 0; l < lags; ++l) {
      double s = 0.0;
      for (std::size_t k = 0; k + l < x.size(); ++k) s += x[k] * x[k + l];
      per_path[l][r] = s / static_cast<double>(x.size() - l);
    }
  });
  AutocovarianceCheck out;
  out.pass = true;
  const double m = static_cast<double>(paths);
  for (std::size_t l = 0; l < lags; ++l) {
    const double mean = pairwise_sum(per_path[l]) / m;
    std::vector<double> dev(paths);
    for (std::size_t r = 0; r < paths; ++r) dev[r] = (per_path[l][r] - mean) * (per_path[l][r] - mean);
    const double se = std::sqrt(pairwise_sum(dev) / (m - 1.0) / m);
    const double exact = fgn_autocovariance(h, static_cast<std::int64_t>(l));
    out.empirical.push_back(mean);
    out.exact.push_back(exact);
    out.z.push_back((mean - exact) / se);
    if (!(std::abs(out.z.back()) <= 4.0)) out.pass = false;
  }
  return out;
}

void write_rate_csv(const RateReport& report, std::ostream& out) {
  out << "H,n,l2_error,stderr,replicates,slope,half_width,pass\n";
  for (const RateCell& c : report.cells) {
    const auto fit = std::find_if(report.fits.begin(), report.fits.end(),
                                  [&](const HurstFit& f) { return f.hurst == c.hurst; });
    const bool fitted = fit != report.fits.end() && fit->fitted;
    out << io::g17(c.hurst) << ',' << c.n << ',' << io::g17(c.l2_error) << ',' << io::g17(c.stderr_) << ','
        << c.replicates << ',' << (fitted ? io::g17(fit->fit.slope) : "nan") << ','
        << (fitted ? io::g17(fit->fit.half_width) : "nan") << ',' << (fitted && fit->pass ? "true" : "false")
        << '\n';
  }
}

}  // namespace fbmlab
