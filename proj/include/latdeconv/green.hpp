#pragma once

#include <optional>

#include "latdeconv/lattice.hpp"
#include "latdeconv/spectral.hpp"

namespace latdeconv {

/// d Gamma((d-2)/2) / (2 pi^{d/2}), the amplitude of C_1(x) ~ a_d |x|^{2-d}.
double a_d(int d);

enum class GreenMethod { spectral, walk_sum };

enum class Periodization {
  raw,         ///< the discrete-torus solution on the given grid
  richardson,  ///< (2^{d-2} C_M - C_{M/2}) / (2^{d-2} - 1), cancels the leading image term
};

struct GreenSpec {
  int dim = 3;
  double mu = 1.0;
  int box_radius = 16;
  GreenMethod method = GreenMethod::spectral;
  /// Defaults to richardson when mu == 1 and raw otherwise.
  std::optional<Periodization> periodization;
  /// Walk length for the walk-sum method; 0 picks a default.
  int walk_steps = 0;
};

struct WalkSumResult {
  double value = 0.0;  ///< partial sum plus tail estimate
  double partial_sum = 0.0;
  double tail_estimate = 0.0;
  int n_max = 0;
};

/// sum_{n <= n_max} mu^n D^{*n}(x) plus a tail estimate: geometric for
/// mu < 1, c n^{-d/2} fitted over the last decade of terms for mu = 1.
WalkSumResult walk_sum(double mu, int d, const LatticePoint& x, int n_max);

struct WalkSumBox {
  LatticeFunction partial;  ///< orbit layout
  LatticeFunction tail;     ///< per-point tail estimate, orbit layout
  int n_max = 0;
};

WalkSumBox walk_sum_box(double mu, int d, int radius, int n_max);

/// Default walk length: geometric tail below 1e-16 for mu < 1, else 400.
int default_walk_steps(double mu);

LatticeFunction green_function(const GreenSpec& spec, const TorusGrid& grid);

struct AsymptoticReport {
  double r_min = 0.0;
  double r_max = 0.0;
  double fitted_amplitude = 0.0;  ///< geometric mean of C(x) <x>^{d-2}
  double fitted_exponent = 0.0;   ///< free log-log slope, negated
  double free_amplitude = 0.0;    ///< intercept of the free fit
  double r_squared = 0.0;
  double max_scaled_residual = 0.0;  ///< max |C - a_d <x>^{2-d}| <x>^d
  double residual_trend = 0.0;  ///< slope of the per-shell max scaled residual against log r
  int points = 0;
};

AsymptoticReport asymptotic_report(const LatticeFunction& C, int d, double r_min, double r_max);

}  // namespace latdeconv
