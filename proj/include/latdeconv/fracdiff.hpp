#pragma once

#include <vector>

#include "latdeconv/lattice.hpp"
#include "latdeconv/spectral.hpp"

namespace latdeconv {

/// int_0^inf sin(t u) u^{-1-delta} du for t > 0 and 0 < delta < 1, by
/// quadrature over half periods with alternating-series acceleration.
double sine_power_integral(double t, double delta);

/// c_delta = int_0^inf sin(u) u^{-1-delta} du.
double c_delta(double delta);

/// Shift of u = m 2pi/M along the first axis; throws unless u >= 0 is grid-aligned.
int grid_shift(const TorusGrid& grid, double u);

/// (U g^)(k) = g^(k + m h e_1) - g^(k - m h e_1) with h = 2pi/M, periodic.
/// The first axis must be dense (reduced fields are re-laid out if needed).
SpectralField u_shift_difference(const SpectralField& field, int m);
SpectralField u_shift_difference(const SpectralField& field, double u);

/// ||U_u g^||_p computed without materialising U_u g^.
double u_shift_norm(const SpectralField& field, int m, double p);

struct FractionalWeight {
  SpectralField w_hat;
  LatticeFunction w;         ///< inverse of w_hat on the box of g
  double max_error = 0.0;    ///< sup |w - sgn(x_1)|x_1|^delta g|
  /// int_0^inf u^{-1-delta} ||U_u g^||_1 du from the grid-aligned samples, folded like w^
  double sampled_u_integral = 0.0;
};

/// w^(k) = (1/(2i c_delta)) int_0^inf u^{-1-delta} (U_u g^)(k) du. The
/// integral over (0, pi] uses degree-8 product integration on the
/// grid-aligned u nodes; the rest is folded back onto (0, pi] using the
/// 2pi-periodicity of U_u g^ in u, with the periodic sum of u^{-1-delta}
/// given by a Hurwitz zeta function. M must be a multiple of 16.
FractionalWeight fractional_weight_transform(const LatticeFunction& g, double delta, const TorusGrid& grid);

struct HolderCurve {
  std::vector<double> u_values;
  std::vector<double> norms;   ///< ||U_u h^_alpha||_1
  double fitted_eta = 0.0;     ///< log-log slope over the smallest decade of u
  bool zero = false;           ///< every norm vanished; fitted_eta is +inf
  /// max over u of norm / u^eta
  double constant(double eta) const;
};

/// Grid-aligned u values m 2pi/M for m = 1, 2, ... with u <= u_max.
std::vector<double> aligned_u_values(const TorusGrid& grid, double u_max);

HolderCurve holder_curve(const LatticeFunction& h, const MultiIndex& alpha, const std::vector<double>& u_values,
                         const TorusGrid& grid);
/// Same, from a precomputed field.
HolderCurve holder_curve(const SpectralField& h_alpha, const std::vector<double>& u_values);

struct ErrorTermCurve {
  HolderCurve curve;            ///< ||U_u d_1^n f^||_1 with f^ = 1/F^ - lambda/A^
  double hat_norm = 0.0;        ///< ||d_1^n f^||_1
};

/// Same curve as holder_curve(error_term_axis_derivative(F, n, grid), u) but
/// streamed one trailing-axis column at a time, so memory stays O(M) per
/// column instead of one M x (trailing tuples) array per field. F must be
/// symmetric; the grid must be shifted.
ErrorTermCurve error_term_holder_curve(const LatticeFunction& F, int order, const std::vector<double>& u_values,
                                       const TorusGrid& grid);

struct ShiftedBoundReport {
  double max_ratio = 0.0;   ///< over nodes and u
  double worst_u = 0.0;
  double exponent = 0.0;    ///< 2 + sigma - eta - |alpha|
};

/// max |U_u E^_alpha(k)| / (u^eta (|k+u~|^p + |k-u~|^p)), p = 2 + sigma - eta - |alpha|.
ShiftedBoundReport shifted_E_bound_check(const LatticeFunction& E, double sigma, double eta, const MultiIndex& alpha,
                                         const std::vector<double>& u_values, const TorusGrid& grid);

struct DifferenceQuotientReport {
  double p = 0.0, p_eta = 0.0;
  double sobolev_norm = 0.0;        ///< (||g||_p^p + sum ||d_j g||_p^p)^{1/p}
  std::vector<double> u_values;
  std::vector<double> ratios;       ///< ||U_u g||_{p_eta} / (u^eta ||g||_{W^{1,p}})
  double max_ratio = 0.0;
};

/// 1/p_eta = 1/p - (1 - eta)/d; needs 1 <= p < d.
DifferenceQuotientReport difference_quotient_check(const SpectralField& g, const std::vector<SpectralField>& gradient,
                                                   double p, double eta, const std::vector<double>& u_values);
/// Builds g^ and its gradient from a lattice function.
DifferenceQuotientReport difference_quotient_check(const LatticeFunction& g, const TorusGrid& grid, double p,
                                                   double eta, const std::vector<double>& u_values);

struct ShiftedDecayReport {
  double a = 0.0, eta = 0.0;
  double rhs = 0.0;            ///< ||h^||_1 + max_alpha (K_alpha + ||h^_alpha||_1)
  double scaled_max = 0.0;     ///< max |h(x)| <x>^a over the annulus
  double constant = 0.0;       ///< scaled_max / rhs
  double trend = 0.0;          ///< slope of per-shell max of |h| <x>^a against log r
  double spread = 0.0;         ///< max/min of the per-shell maxima
  bool zero = false;
};

/// |h(x)| <x>^a <= c (||h^||_1 + max_alpha (K_alpha + ||h^_alpha||_1)) on the
/// annulus; K_alpha and ||h^_alpha||_1 come from the caller, one entry per alpha.
ShiftedDecayReport shifted_decay_bound(const LatticeFunction& h, double a, double eta, double hat_norm,
                                       const std::vector<double>& K_alphas,
                                       const std::vector<double>& hat_alpha_norms, double r_min, double r_max);

}  // namespace latdeconv
