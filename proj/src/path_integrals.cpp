#include "fbmlab/path_integrals.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "fbmlab/errors.h"

namespace fbmlab {

SignedMeasure::SignedMeasure(std::vector<Atom> atoms, double base_constant) : atoms_(std::move(atoms)), base_(base_constant) {
  if (!std::isfinite(base_)) throw DomainError("signed measure: base constant must be finite");
  for (const Atom& a : atoms_)
    if (!std::isfinite(a.location) || !std::isfinite(a.mass)) throw DomainError("signed measure: atoms must be finite");
}

SignedMeasure SignedMeasure::indicator_above(double a) { return SignedMeasure({{a, 0.5}}, 0.5); }

SignedMeasure SignedMeasure::with_density(std::vector<Atom> atoms, double base_constant, const std::vector<double>& xs,
                                          const std::vector<double>& density, std::size_t max_atoms) {
  if (xs.size() != density.size() || xs.size() < 2) throw DomainError("density table: need matching xs/values, size >= 2");
  if (max_atoms == 0) throw DomainError("density quantisation needs at least one atom");
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (!(xs[i] > xs[i - 1])) throw DomainError("density table: xs must increase");

  // Cumulative |g| mass, trapezoid per cell.
  std::vector<double> cum(xs.size(), 0.0);
  for (std::size_t i = 1; i < xs.size(); ++i)
    cum[i] = cum[i - 1] + 0.5 * (std::abs(density[i]) + std::abs(density[i - 1])) * (xs[i] - xs[i - 1]);
  const double mass = cum.back();

  SignedMeasure out(std::move(atoms), base_constant);
  out.quantised_mass_ = mass;
  if (!(mass > 0.0)) return out;

  const std::size_t k_atoms = max_atoms;
  const double piece = mass / static_cast<double>(k_atoms);
  std::size_t cell = 1;
  for (std::size_t k = 0; k < k_atoms; ++k) {
    const double target = (static_cast<double>(k) + 0.5) * piece;
    while (cell + 1 < xs.size() && cum[cell] < target) ++cell;
    const double span = cum[cell] - cum[cell - 1];
    const double w = span > 0.0 ? (target - cum[cell - 1]) / span : 0.5;
    const double x = xs[cell - 1] + w * (xs[cell] - xs[cell - 1]);
    const double g = density[cell - 1] + w * (density[cell] - density[cell - 1]);
    out.atoms_.push_back({x, g < 0.0 ? -piece : piece});
  }
  // x falls inside at most one quantile cell; elsewhere each cell's sgn is exact.
  out.quantisation_sup_error_ = 2.0 * piece;
  return out;
}

double SignedMeasure::total_variation() const noexcept {
  double tv = 0.0;
  for (const Atom& a : atoms_) tv += std::abs(a.mass);
  return tv;
}

double SignedMeasure::growth_functional(double P) const {
  if (!(P > 0.0)) throw DomainError("growth functional needs P > 0");
  double g = 0.0;
  for (const Atom& a : atoms_) g += std::abs(a.mass) * std::exp(-P * a.location * a.location / 2.0);
  return g;
}

double eval_integrand(const SignedMeasure& f, double x) {
  double v = f.base_constant();
  for (const Atom& a : f.atoms()) v += a.mass * (x > a.location ? 1.0 : -1.0);
  return v;
}

// ---------------------------------------------------------------------------

namespace {

const std::vector<double>& component_values(const FbmPath& path, int c) {
  if (c < 1 || c > path.components())
    throw DomainError("component index " + std::to_string(c) + " not present in path");
  return path.values[static_cast<std::size_t>(c - 1)];
}

// Path indices of the coarse grid's nodes.
std::vector<std::size_t> coarse_indices(const FbmPath& path, const GridSpec& grid) {
  const std::int64_t factor = path.grid.refinement_factor_over(grid);
  std::vector<std::size_t> idx;
  idx.reserve(grid.node_count());
  for (std::int64_t k = 0; k <= grid.full_steps(); ++k) {
    const auto i = static_cast<std::size_t>(k * factor);
    if (i >= path.grid.node_count()) throw AlignmentError("coarse node beyond the path grid");
    if (k == grid.full_steps() && !grid.has_partial_step() && i != path.grid.node_count() - 1)
      throw AlignmentError("coarse terminal node not at the path's terminal node");
    idx.push_back(i);
  }
  if (grid.has_partial_step()) idx.push_back(path.grid.node_count() - 1);
  return idx;
}

}  // namespace

double riemann_sum(const FbmPath& path, const SignedMeasure& f, ComponentPair pair, const GridSpec& grid) {
  const auto& bi = component_values(path, pair.i);
  const auto& bj = component_values(path, pair.j);
  const auto idx = coarse_indices(path, grid);
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < idx.size(); ++k) sum += eval_integrand(f, bi[idx[k]]) * (bj[idx[k + 1]] - bj[idx[k]]);
  return sum;
}

double reference_integral(const FbmPath& path, const SignedMeasure& f, ComponentPair pair, std::int64_t fine_factor) {
  if (fine_factor < kMinFineFactor)
    throw RefinementError("reference grid must be at least " + std::to_string(kMinFineFactor) + "x finer, got " +
                          std::to_string(fine_factor));
  if (path.grid.points_per_unit() % fine_factor != 0)
    throw RefinementError("fine factor does not divide the path's points per unit");
  return riemann_sum(path, f, pair, path.grid);
}

double sign_change_error(const FbmPath& path, double a, const GridSpec& grid, int component) {
  const auto& b = component_values(path, component);
  const auto idx = coarse_indices(path, grid);
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
    const double x0 = b[idx[k]], x1 = b[idx[k + 1]];
    if ((x0 > a) != (x1 > a)) sum += std::abs(x1 - a);
  }
  return std::pow(static_cast<double>(grid.points_per_unit()), 2.0 * path.hurst.value() - 1.0) * sum;
}

double closed_form_error(const FbmPath& path, const SignedMeasure& f, const GridSpec& grid, int component) {
  double s = 0.0;
  for (const Atom& at : f.atoms()) s += 2.0 * at.mass * sign_change_error(path, at.location, grid, component);
  return s;
}

ErrorSample make_error_sample(const FbmPath& path, const SignedMeasure& f, ComponentPair pair, std::int64_t n,
                              std::int64_t fine_factor) {
  if (path.grid.points_per_unit() != n * fine_factor)
    throw RefinementError("path grid is not fine_factor times the coarse grid");
  const GridSpec coarse(path.grid.horizon(), n, path.grid.t_end());
  ErrorSample out;
  out.pair = pair;
  out.n = n;
  out.riemann = riemann_sum(path, f, pair, coarse);
  out.reference = reference_integral(path, f, pair, fine_factor);
  out.s_n = std::pow(static_cast<double>(n), 2.0 * path.hurst.value() - 1.0) * (out.reference - out.riemann);
  return out;
}

}  // namespace fbmlab
