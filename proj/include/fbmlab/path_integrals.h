#pragma once

// Left-point Riemann sums of ∫ f(B^i) dB^j for bounded-variation f, fine-grid
// reference integrals and the normalised discretisation error S_n.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fbmlab/fgn_engine.h"

namespace fbmlab {

struct Atom {
  double location;
  double mass;
};

/// f(x) = base + Σ_k mass_k sgn(x - location_k), with sgn(0) = -1 so f is
/// left-continuous. A density part is quantised into atoms at construction.
class SignedMeasure {
public:
  SignedMeasure() = default;
  explicit SignedMeasure(std::vector<Atom> atoms, double base_constant = 0.0);

  /// f = 1{x > a}: atom (a, 1/2) with base 1/2.
  static SignedMeasure indicator_above(double a);
  static SignedMeasure constant(double value) { return SignedMeasure({}, value); }

  /// Adds the density g, tabulated on an increasing grid xs, as at most
  /// max_atoms atoms placed at the quantiles of |g| (trapezoid masses).
  static SignedMeasure with_density(std::vector<Atom> atoms, double base_constant, const std::vector<double>& xs,
                                    const std::vector<double>& density, std::size_t max_atoms = 10000);

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  double base_constant() const noexcept { return base_; }
  bool empty() const noexcept { return atoms_.empty(); }

  /// Σ|c_k| including the quantised density.
  double total_variation() const noexcept;
  /// ∫ e^{-P a^2/2} d|μ|(a). Throws DomainError unless P > 0.
  double growth_functional(double P) const;
  /// Total-variation mass of the density part before quantisation.
  double quantised_mass() const noexcept { return quantised_mass_; }
  /// Bound on sup_x |f(x) - f_quantised(x)|.
  double quantisation_sup_error() const noexcept { return quantisation_sup_error_; }

private:
  std::vector<Atom> atoms_;
  double base_ = 0.0;
  double quantised_mass_ = 0.0;
  double quantisation_sup_error_ = 0.0;
};

double eval_integrand(const SignedMeasure& f, double x);

/// Component pair (i, j), 1-based: integrand in B^i, integrator B^j.
struct ComponentPair {
  int i = 1;
  int j = 1;
};

/// Σ_{k=0}^{⌊nt⌋} f(B^i_{k/n}) (B^j_{(k+1)/n ∧ t} - B^j_{k/n}) on `grid`, read off a
/// path whose grid refines it. Throws AlignmentError otherwise.
double riemann_sum(const FbmPath& path, const SignedMeasure& f, ComponentPair pair, const GridSpec& grid);

inline constexpr std::int64_t kMinFineFactor = 16;

/// Riemann sum on the path's own grid, which must be fine_factor times finer
/// than the coarse grid of interest. Throws RefinementError if fine_factor < 16
/// or does not divide the path's points per unit.
double reference_integral(const FbmPath& path, const SignedMeasure& f, ComponentPair pair, std::int64_t fine_factor);

/// n^{2H-1} Σ_k |B_{(k+1)/n ∧ t} - a| 1{B_k and B_{(k+1)/n ∧ t} on opposite sides of a},
/// where "above a" means > a. Exact S_n for f = 1{x > a}, i = j.
double sign_change_error(const FbmPath& path, double a, const GridSpec& grid, int component = 1);

/// Exact S_n for i = j and a pure-atom integrand: Σ_k 2 c_k sign_change_error(a_k).
double closed_form_error(const FbmPath& path, const SignedMeasure& f, const GridSpec& grid, int component = 1);

struct ErrorSample {
  ComponentPair pair;
  std::int64_t n = 0;
  double riemann = 0.0;
  double reference = 0.0;
  double s_n = 0.0;  // n^{2H-1} (reference - riemann)
};

/// Coarse grid has n points per unit; the path grid is fine_factor times finer.
ErrorSample make_error_sample(const FbmPath& path, const SignedMeasure& f, ComponentPair pair, std::int64_t n,
                              std::int64_t fine_factor);

}  // namespace fbmlab
