#pragma once

#include <optional>

#include "latdeconv/lattice.hpp"
#include "latdeconv/spectral.hpp"

namespace latdeconv {

struct CriticalConstants {
  double lambda = 0.0;
  double mu = 0.0;
  double K_F_second = 0.0;  ///< -sum |x|^2 F(x)
  double F_hat_zero = 0.0;
  bool critical = false;    ///< |F^(0)| within the criticality tolerance; then mu = 1 exactly
};

/// lambda = 1/(F^(0) + K''_F), mu = 1 - lambda F^(0). F^(0) in [-tol, tol] counts as 0.
CriticalConstants critical_constants(const LatticeFunction& F, double criticality_tol = 1e-12);

struct ErrorKernel {
  LatticeFunction E;           ///< (delta - mu D) - lambda F
  double zeroth = 0.0;         ///< sum E
  double second = 0.0;         ///< sum |x|^2 E
  double scale = 0.0;          ///< sum |x|^2 |E|
};

/// Throws InvariantError when either moment exceeds tol * scale.
ErrorKernel error_kernel(const LatticeFunction& F, const CriticalConstants& c, double tol = 1e-10);

enum class Directions { all, axis, diagonal };
const char* to_string(Directions d);

struct DecayFit {
  double exponent = 0.0;   ///< negated log-log slope
  double amplitude = 0.0;  ///< exp(intercept)
  double r_min = 0.0, r_max = 0.0;
  Directions directions = Directions::all;
  double r_squared = 0.0;
  /// Same fit on the per-shell maxima of |f|; insensitive to sign changes.
  double envelope_exponent = 0.0;
  int points = 0;
  int radii = 0;
  bool zero_function = false;  ///< f vanishes on the window; exponent is +inf
};

/// Least squares of log|f| against log|x| on the window. axis uses x = t e_1,
/// diagonal x = t(1,...,1); all uses every point, weighted by orbit size.
/// Needs at least 8 distinct radii with f != 0.
DecayFit decay_fit(const LatticeFunction& f, double r_min, double r_max, Directions directions = Directions::all);

struct DeconvOptions {
  std::optional<double> r_min, r_max;  ///< fit window, default [R/4, R/2]
  std::optional<double> amplitude_radius;  ///< default R/3, rounded to an integer
  bool refine = true;   ///< repeat the fits on the M/2 grid and report the changes
  double residual_work = 5e7;  ///< cap on kernel-point lookups for the torus residual
};

struct AmplitudeCheck {
  int radius = 0;
  double predicted = 0.0;   ///< a_d / K''_F
  double axis_ratio = 0.0;  ///< G(r e_1) r^{d-2} / predicted
  double shell_ratio = 0.0; ///< same, averaged over the sphere |x| = r
};

struct Refinement {
  int coarse_points = 0;
  double amplitude_change = 0.0;  ///< relative change of the axis ratio
  double exponent_change = 0.0;   ///< absolute change of the fitted exponent of f
};

struct DeconvolutionResult {
  CriticalConstants constants;
  ErrorKernel error;
  LatticeFunction G;
  LatticeFunction C;  ///< torus C_mu on the same grid
  LatticeFunction f;  ///< G - lambda C
  double f_sup = 0.0;
  double torus_residual = 0.0;  ///< sup |F * G - delta| over the checked points
  std::size_t residual_points = 0;
  bool residual_complete = false;  ///< every interior point was checked
  double split_residual = 0.0;  ///< max relative |G^ - lambda C^ - E^/(A^ F^)|
  std::optional<DecayFit> fit_all, fit_axis, fit_diagonal;
  AmplitudeCheck amplitude;
  std::optional<Refinement> refinement;
};

/// G = inverse of 1/F^ on the box and the split G = lambda C_mu + f.
/// Throws InvariantError when the torus residual exceeds 1e-11 or the
/// nodewise split exceeds 1e-10.
DeconvolutionResult deconvolve(const LatticeFunction& F, int R, const TorusGrid& grid,
                               const DeconvOptions& options = {});

struct DerivativeBound {
  double exponent = 0.0;   ///< 2 + sigma - |alpha|
  double max_ratio = 0.0;  ///< max over nodes of |E^_alpha(k)| / |k|^exponent
  std::vector<double> argmax;
};

/// Nodewise size of the derivatives of E^ against |k|^{2+sigma-|alpha|}. The
/// k = 0 node is skipped, so unshifted grids work and sample the axes, where
/// the maximum tends to sit.
DerivativeBound error_derivative_bound(const LatticeFunction& E, const MultiIndex& alpha, double sigma,
                                       const TorusGrid& grid);

/// d^n/dk_1^n of f^ = 1/F^ - lambda/A^ at every node, with A = delta - mu D.
/// Built from exact transforms of F and A by the Leibniz recursion for
/// reciprocals, so f is never truncated in x-space. Needs a shifted grid
/// for critical F.
SpectralField error_term_axis_derivative(const LatticeFunction& F, int order, const TorusGrid& grid);

struct InhomogeneousOptions {
  double rho = 2.0;  ///< declared tail exponent of F; g must decay at least like <x>^{-(d + rho ^ 2)}
  std::optional<double> r_min, r_max;
};

struct InhomogeneousResult {
  LatticeFunction H;
  double cross_check = 0.0;  ///< sup |H - g * G| on the inner half-box
  double predicted = 0.0;    ///< a_d sum g / K''_F
  double min_ratio = 0.0, max_ratio = 0.0;  ///< H <x>^{d-2} / predicted over the annulus
  double r_min = 0.0, r_max = 0.0;
};

/// H = inverse of g^/F^ for critical F.
InhomogeneousResult inhomogeneous_solve(const LatticeFunction& F, const LatticeFunction& g, int R,
                                        const TorusGrid& grid, const InhomogeneousOptions& options = {});

}  // namespace latdeconv
