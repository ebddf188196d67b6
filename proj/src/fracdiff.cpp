#include "latdeconv/fracdiff.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>
#include <gsl/gsl_sf_zeta.h>
#include <gsl/gsl_sum.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <string>

#include "latdeconv/common.hpp"
#include "latdeconv/deconv.hpp"
#include "latdeconv/fit.hpp"
#include "latdeconv/parallel.hpp"

namespace latdeconv {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

void require_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0))
    throw PreconditionError("delta must lie strictly between 0 and 1, got " + std::to_string(delta));
}

struct FixedRule {
  std::vector<double> nodes, weights;
};

/// Gauss rule on [a, b] for the weight (x - a)^beta.
FixedRule jacobi_rule(std::size_t n, double a, double b, double beta) {
  std::unique_ptr<gsl_integration_fixed_workspace, decltype(&gsl_integration_fixed_free)> w(
      gsl_integration_fixed_alloc(gsl_integration_fixed_jacobi, n, a, b, 0.0, beta), gsl_integration_fixed_free);
  if (!w) throw InvariantError("Gauss-Jacobi rule allocation failed");
  const double* x = gsl_integration_fixed_nodes(w.get());
  const double* wt = gsl_integration_fixed_weights(w.get());
  return {{x, x + n}, {wt, wt + n}};
}

FixedRule legendre_rule(std::size_t n, double a, double b) {
  std::unique_ptr<gsl_integration_glfixed_table, decltype(&gsl_integration_glfixed_table_free)> t(
      gsl_integration_glfixed_table_alloc(n), gsl_integration_glfixed_table_free);
  FixedRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (std::size_t i = 0; i < n; ++i) gsl_integration_glfixed_point(a, b, i, &r.nodes[i], &r.weights[i], t.get());
  return r;
}

/// Sum over n >= 1 of (2 pi n + v)^{-s}.
double periodic_tail(double v, double s) { return std::pow(two_pi, -s) * gsl_sf_hzeta(s, 1.0 + v / two_pi); }

constexpr int panel_degree = 8;

/// Weights W_m, m = 0..n, with int_0^inf u^{-1-delta} Phi(u) du = sum W_m Phi(m h)
/// for Phi 2pi-periodic, Phi(0) = 0 and Phi(2pi - v) = parity * Phi(v); h = pi/n.
/// Degree-8 product integration on panels of 8 cells; n must be a multiple of 8.
std::vector<double> folded_weights(int n, double delta, double parity) {
  const double s = 1.0 + delta;
  const double h = std::numbers::pi / n;
  // folded weight minus the u^{-1-delta} singularity
  auto smooth = [&](double v) { return periodic_tail(v, s) + parity * periodic_tail(-v, s); };
  auto full = [&](double v) { return std::pow(v, -s) + smooth(v); };
  std::vector<double> W(n + 1, 0.0);
  auto lagrange = [&](int j, double t) {  // basis on nodes 0..8 in units of h
    double l = 1.0;
    for (int q = 0; q <= panel_degree; ++q)
      if (q != j) l *= (t - q) / (j - q);
    return l;
  };
  for (int panel = 0; panel * panel_degree < n; ++panel) {
    const int m0 = panel * panel_degree;
    const double a = m0 * h, b = (m0 + panel_degree) * h;
    if (panel == 0) {
      // v^{-1-delta} l_j(v) = v^{-delta} (l_j(v) / v) with l_j(0) = 0 for j >= 1
      const FixedRule jr = jacobi_rule(12, a, b, -delta);
      for (std::size_t q = 0; q < jr.nodes.size(); ++q) {
        const double v = jr.nodes[q];
        for (int j = 1; j <= panel_degree; ++j) W[j] += jr.weights[q] * lagrange(j, v / h) / v;
      }
      const FixedRule lr = legendre_rule(24, a, b);
      for (std::size_t q = 0; q < lr.nodes.size(); ++q) {
        const double v = lr.nodes[q], sv = smooth(v);
        for (int j = 0; j <= panel_degree; ++j) W[j] += lr.weights[q] * sv * lagrange(j, v / h);
      }
    } else {
      const FixedRule lr = legendre_rule(24, a, b);
      for (std::size_t q = 0; q < lr.nodes.size(); ++q) {
        const double v = lr.nodes[q], fv = full(v);
        for (int j = 0; j <= panel_degree; ++j) W[m0 + j] += lr.weights[q] * fv * lagrange(j, (v - a) / h);
      }
    }
  }
  return W;
}

SpectralField first_axis_dense(const SpectralField& field) {
  if (field.layout() == FieldLayout::reduced && field.lead_axes() == 0) return field.with_lead_axes(1);
  return field;
}

std::size_t wrap(long long i, int M) { return static_cast<std::size_t>(((i % M) + M) % M); }

double power_abs(cplx z, double p) {
  const double a = std::abs(z);
  return p == 1.0 ? a : (p == 2.0 ? std::norm(z) : std::pow(a, p));
}

}  // namespace

double sine_power_integral(double t, double delta) {
  require_delta(delta);
  if (!(t > 0.0)) throw PreconditionError("sine_power_integral needs t > 0");
  const double half = std::numbers::pi / t;
  // first half period: u^{-delta} (sin(tu)/u) under a Gauss-Jacobi rule
  const FixedRule jr = jacobi_rule(40, 0.0, half, -delta);
  KahanSum first;
  for (std::size_t q = 0; q < jr.nodes.size(); ++q) first += jr.weights[q] * std::sin(t * jr.nodes[q]) / jr.nodes[q];
  // remaining half periods alternate in sign and decay like n^{-1-delta}
  constexpr int terms = 40;
  std::vector<double> a(terms);
  a[0] = first.value();
  const FixedRule base = legendre_rule(32, 0.0, half);
  for (int n = 1; n < terms; ++n) {
    KahanSum s;
    for (std::size_t q = 0; q < base.nodes.size(); ++q) {
      const double u = n * half + base.nodes[q];
      s += base.weights[q] * std::sin(t * u) * std::pow(u, -1.0 - delta);
    }
    a[n] = s.value();
  }
  std::unique_ptr<gsl_sum_levin_u_workspace, decltype(&gsl_sum_levin_u_free)> w(gsl_sum_levin_u_alloc(terms),
                                                                                  gsl_sum_levin_u_free);
  double sum = 0.0, err = 0.0;
  gsl_error_handler_t* old = gsl_set_error_handler_off();
  const int status = gsl_sum_levin_u_accel(a.data(), terms, w.get(), &sum, &err);
  gsl_set_error_handler(old);
  if (status != GSL_SUCCESS || !std::isfinite(sum))
    throw InvariantError("series acceleration failed for the sine power integral");
  return sum;
}

double c_delta(double delta) { return sine_power_integral(1.0, delta); }

int grid_shift(const TorusGrid& grid, double u) {
  if (!(u >= 0.0)) throw PreconditionError("shift u must be nonnegative");
  const double h = grid.spacing();
  const double m = std::round(u / h);
  if (std::abs(u - m * h) > 1e-9 * std::max(1.0, u))
    throw PreconditionError("u = " + std::to_string(u) + " is not a multiple of 2pi/M = " + std::to_string(h));
  return static_cast<int>(m);
}

SpectralField u_shift_difference(const SpectralField& field, int m) {
  SpectralField out = first_axis_dense(field);
  const SpectralField in = out;
  const int M = in.grid().points();
  const std::size_t stride = in.size() / M;
  const auto src = in.values();
  auto dst = out.values();
  parallel_for(static_cast<std::size_t>(M), [&](std::size_t b, std::size_t e) {
    for (std::size_t i0 = b; i0 < e; ++i0) {
      const std::size_t plus = wrap(static_cast<long long>(i0) + m, M) * stride;
      const std::size_t minus = wrap(static_cast<long long>(i0) - m, M) * stride;
      for (std::size_t r = 0; r < stride; ++r) dst[i0 * stride + r] = src[plus + r] - src[minus + r];
    }
  });
  return out;
}

SpectralField u_shift_difference(const SpectralField& field, double u) {
  return u_shift_difference(field, grid_shift(field.grid(), u));
}

double u_shift_norm(const SpectralField& field, int m, double p) {
  if (!(p >= 1.0)) throw PreconditionError("u_shift_norm needs p >= 1");
  const SpectralField in = first_axis_dense(field);
  const int M = in.grid().points();
  const std::size_t stride = in.size() / M;
  const auto v = in.values();
  auto diff = [&](std::size_t i) {
    const long long i0 = static_cast<long long>(i / stride);
    const std::size_t r = i % stride;
    return v[wrap(i0 + m, M) * stride + r] - v[wrap(i0 - m, M) * stride + r];
  };
  if (std::isinf(p)) return deterministic_max(in.size(), [&](std::size_t i) { return std::abs(diff(i)); });
  const std::vector<double> mult = in.multiplicities();
  const double mean =
      deterministic_sum(in.size(), [&](std::size_t i) { return mult[i] * power_abs(diff(i), p); }) /
      in.grid().total_nodes();
  return p == 1.0 ? mean : std::pow(mean, 1.0 / p);
}

FractionalWeight fractional_weight_transform(const LatticeFunction& g, double delta, const TorusGrid& grid) {
  require_delta(delta);
  const int M = grid.points();
  if (M % (2 * panel_degree) != 0)
    throw PreconditionError("fractional_weight_transform needs M divisible by 16, got " + std::to_string(M));
  if (M < 2 * g.radius() + 1)
    throw PreconditionError("grid with M=" + std::to_string(M) + " aliases a function of radius " +
                            std::to_string(g.radius()));
  const int n = M / 2;
  const SpectralField g_hat = first_axis_dense(forward_transform(g, grid));
  const std::vector<double> W = folded_weights(n, delta, -1.0);
  const double c = c_delta(delta);

  FractionalWeight out;
  out.w_hat = g_hat;
  const std::size_t stride = g_hat.size() / M;
  const auto src = g_hat.values();
  auto dst = out.w_hat.values();
  const cplx scale = 1.0 / (cplx(0.0, 2.0) * c);
  parallel_for(g_hat.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const long long i0 = static_cast<long long>(i / stride);
      const std::size_t r = i % stride;
      cplx acc = 0.0;
      for (int m = 1; m <= n; ++m)
        acc += W[m] * (src[wrap(i0 + m, M) * stride + r] - src[wrap(i0 - m, M) * stride + r]);
      dst[i] = scale * acc;
    }
  });

  out.w = inverse_on_box(out.w_hat, g.radius(), false);
  double err = 0.0;
  out.w.for_each([&](std::span<const int> x, double, double v) {
    const double x1 = x[0];
    const double expected = x1 == 0 ? 0.0 : std::copysign(std::pow(std::abs(x1), delta), x1) * g(x);
    err = std::max(err, std::abs(v - expected));
  });
  out.max_error = err;

  // the norm curve is even about pi, so the fold adds both tails
  const std::vector<double> Wn = folded_weights(n, delta, 1.0);
  KahanSum integral;
  for (int m = 1; m <= n; ++m) integral += Wn[m] * u_shift_norm(g_hat, m, 1.0);
  out.sampled_u_integral = integral.value();
  if (!std::isfinite(out.sampled_u_integral)) throw PreconditionError("u-integral of ||U_u g^||_1 diverges");
  return out;
}

double HolderCurve::constant(double eta) const {
  double k = 0.0;
  for (std::size_t j = 0; j < u_values.size(); ++j) k = std::max(k, norms[j] / std::pow(u_values[j], eta));
  return k;
}

std::vector<double> aligned_u_values(const TorusGrid& grid, double u_max) {
  std::vector<double> u;
  const double h = grid.spacing();
  for (int m = 1; m * h <= u_max * (1.0 + 1e-12); ++m) u.push_back(m * h);
  return u;
}

namespace {

std::vector<double> sorted_unit_u(std::vector<double> u) {
  std::sort(u.begin(), u.end());
  for (double v : u)
    if (!(v > 0.0 && v <= 1.0 + 1e-12)) throw PreconditionError("Hoelder curve u values must lie in (0, 1]");
  return u;
}

void fit_slope(HolderCurve& curve) {
  std::vector<double> lu, ln;
  double u_lo = 0.0;
  for (std::size_t j = 0; j < curve.u_values.size(); ++j) {
    if (!(curve.norms[j] > 0.0)) continue;
    if (u_lo == 0.0) u_lo = curve.u_values[j];
    if (curve.u_values[j] > 10.0 * u_lo * (1.0 + 1e-12)) break;
    lu.push_back(std::log(curve.u_values[j]));
    ln.push_back(std::log(curve.norms[j]));
  }
  if (u_lo == 0.0 && !curve.u_values.empty()) {
    curve.zero = true;
    curve.fitted_eta = std::numeric_limits<double>::infinity();
    return;
  }
  if (lu.size() < 4)
    throw PreconditionError("Hoelder slope needs at least 4 usable u values in the smallest decade, got " +
                            std::to_string(lu.size()));
  curve.fitted_eta = linear_fit(lu, ln).slope;
}

}  // namespace

HolderCurve holder_curve(const SpectralField& h_alpha, const std::vector<double>& u_values) {
  HolderCurve curve;
  curve.u_values = sorted_unit_u(u_values);
  const SpectralField field = first_axis_dense(h_alpha);
  for (double u : curve.u_values) curve.norms.push_back(u_shift_norm(field, grid_shift(field.grid(), u), 1.0));
  fit_slope(curve);
  return curve;
}

ErrorTermCurve error_term_holder_curve(const LatticeFunction& F, int order, const std::vector<double>& u_values,
                                       const TorusGrid& grid) {
  if (order < 0) throw PreconditionError("derivative order must be nonnegative");
  if (!grid.shifted()) throw PreconditionError("error_term_holder_curve needs a shifted grid");
  const int d = grid.dim(), M = grid.points();
  if (F.dim() != d || d < 2) throw PreconditionError("kernel and grid dimensions differ");
  const CriticalConstants c = critical_constants(F);
  const LatticeFunction A = LatticeFunction::delta(d) - c.mu * LatticeFunction::nearest_neighbour(d);

  ErrorTermCurve out;
  out.curve.u_values = sorted_unit_u(u_values);
  std::vector<int> shifts;
  for (double u : out.curve.u_values) shifts.push_back(grid_shift(grid, u));

  // Transforms of the slices x_1 = t over the trailing axes; symmetric in t.
  const TorusGrid tail(d - 1, M, true);
  struct Slices {
    int T = 0;
    std::vector<std::vector<double>> q;  // q[t][r]
  };
  std::vector<double> mult;
  auto slices = [&](const LatticeFunction& f) {
    const LatticeFunction sym = f.layout() == Layout::orbits ? f : f.to_orbits();
    Slices s;
    s.T = sym.radius();
    std::vector<int> x(d);
    for (int t = 0; t <= s.T; ++t) {
      const LatticeFunction slice =
          LatticeFunction::from_function(d - 1, s.T, Layout::orbits, [&](std::span<const int> y) {
            x[0] = t;
            std::copy(y.begin(), y.end(), x.begin() + 1);
            return sym(x);
          });
      const SpectralField fs = forward_transform(slice, tail);
      if (mult.empty()) mult = fs.multiplicities();
      std::vector<double> re(fs.size());
      for (std::size_t r = 0; r < fs.size(); ++r) re[r] = fs.values()[r].real();
      s.q.push_back(std::move(re));
    }
    return s;
  };
  const Slices sF = slices(F), sA = slices(A);
  const std::size_t columns = mult.size();
  require_cells(static_cast<double>(columns) * (sF.T + sA.T + 2), "error-term slice transforms");

  // Everything below is real: F and A are symmetric, so each column of
  // d^n f^ is even or odd in k_1 and only the nodes k_1 > 0 (i < M/2) are
  // computed. Node M-1-i is the reflection of node i.
  const int H = M / 2;

  // basis[t][j][i] = (it)^j e^{ik_i t} + (-it)^j e^{-ik_i t}, halved at t = 0:
  // 2 (-1)^{j/2} t^j cos(k t) for even j, 2 (-1)^{(j+1)/2} t^j sin(k t) for odd j
  auto basis = [&](int T) {
    std::vector<std::vector<std::vector<double>>> b(T + 1, std::vector<std::vector<double>>(order + 1));
    for (int t = 0; t <= T; ++t)
      for (int j = 0; j <= order; ++j)
        for (int i = 0; i < H; ++i) {
          const double k = grid.node(i), tj = std::pow(static_cast<double>(t), j);
          const double sign = ((j + 1) / 2) % 2 == 0 ? 1.0 : -1.0;
          const double trig = j % 2 == 0 ? std::cos(k * t) : std::sin(k * t);
          b[t][j].push_back((t == 0 ? 1.0 : 2.0) * sign * tj * trig);
        }
    return b;
  };
  const auto bF = basis(sF.T), bA = basis(sA.T);

  // nodewise Leibniz recursion for d^n (1/v) along the column
  auto reciprocal_column = [&](const Slices& s, const std::vector<std::vector<std::vector<double>>>& b, std::size_t r,
                               std::vector<std::vector<double>>& v, std::vector<std::vector<double>>& h) {
    for (int j = 0; j <= order; ++j) {
      std::fill(v[j].begin(), v[j].end(), 0.0);
      for (int t = 0; t <= s.T; ++t) {
        const double q = s.q[t][r];
        if (q == 0.0) continue;
        const double* row = b[t][j].data();
        for (int i = 0; i < H; ++i) v[j][i] += q * row[i];
      }
    }
    for (int i = 0; i < H; ++i) {
      if (std::abs(v[0][i]) < 1e-13) throw PreconditionError("pole on grid in the error-term column");
      h[0][i] = 1.0 / v[0][i];
      for (int m = 1; m <= order; ++m) {
        double acc = 0.0, binom = 1.0;
        for (int j = 1; j <= m; ++j) {
          binom = binom * (m - j + 1) / j;
          acc += binom * v[j][i] * h[m - j][i];
        }
        h[m][i] = -h[0][i] * acc;
      }
    }
  };

  const std::size_t nu = shifts.size();
  int pad = 0;
  for (int m : shifts) pad = std::max(pad, m);
  const double parity = order % 2 == 0 ? 1.0 : -1.0;
  constexpr std::size_t chunk = 1024;
  const std::size_t chunks = (columns + chunk - 1) / chunk;
  std::vector<std::vector<double>> partial(chunks, std::vector<double>(nu + 1, 0.0));
  parallel_for(chunks, [&](std::size_t cb, std::size_t ce) {
    std::vector<std::vector<double>> v(order + 1, std::vector<double>(H)), hF = v, hA = v;
    // column on the full circle, padded by the largest shift on both sides
    std::vector<double> ext(M + 2 * pad);
    for (std::size_t ch = cb; ch < ce; ++ch) {
      std::vector<KahanSum> acc(nu + 1);
      const std::size_t hi = std::min(columns, (ch + 1) * chunk);
      for (std::size_t r = ch * chunk; r < hi; ++r) {
        reciprocal_column(sF, bF, r, v, hF);
        reciprocal_column(sA, bA, r, v, hA);
        double* col = ext.data() + pad;
        double s0 = 0.0;
        for (int i = 0; i < H; ++i) {
          col[i] = hF[order][i] - c.lambda * hA[order][i];
          col[M - 1 - i] = parity * col[i];
          s0 += std::abs(col[i]);
        }
        for (int i = 0; i < pad; ++i) {
          ext[i] = col[wrap(i - pad, M)];
          col[M + i] = col[wrap(M + i, M)];
        }
        acc[nu] += mult[r] * 2.0 * s0;
        // |col(i + m) - col(i - m)| is symmetric under the reflection, so half the nodes suffice
        for (std::size_t q = 0; q < nu; ++q) {
          const double* up = col + shifts[q];
          const double* down = col - shifts[q];
          double sq = 0.0;
          for (int i = 0; i < H; ++i) sq += std::abs(up[i] - down[i]);
          acc[q] += mult[r] * 2.0 * sq;
        }
      }
      for (std::size_t q = 0; q <= nu; ++q) partial[ch][q] = acc[q].value();
    }
  });
  const double nodes = grid.total_nodes();
  for (std::size_t q = 0; q <= nu; ++q) {
    KahanSum total;
    for (const auto& p : partial) total += p[q];
    if (q < nu)
      out.curve.norms.push_back(total.value() / nodes);
    else
      out.hat_norm = total.value() / nodes;
  }
  fit_slope(out.curve);
  return out;
}

HolderCurve holder_curve(const LatticeFunction& h, const MultiIndex& alpha, const std::vector<double>& u_values,
                         const TorusGrid& grid) {
  return holder_curve(spectral_derivative(h, alpha, grid, TransformPath::automatic, 1), u_values);
}

ShiftedBoundReport shifted_E_bound_check(const LatticeFunction& E, double sigma, double eta, const MultiIndex& alpha,
                                         const std::vector<double>& u_values, const TorusGrid& grid) {
  if (!(sigma > 0.0 && sigma <= 2.0)) throw PreconditionError("sigma must lie in (0, 2]");
  if (!(eta >= 0.0 && eta <= 1.0)) throw PreconditionError("eta must lie in [0, 1]");
  ShiftedBoundReport rep;
  rep.exponent = 2.0 + sigma - eta - alpha.order();
  if (!(rep.exponent > 0.0)) throw PreconditionError("need |alpha| + eta < 2 + sigma");
  const SpectralField e_hat = spectral_derivative(E, alpha, grid, TransformPath::automatic, 1);
  const int M = grid.points(), d = grid.dim();
  const std::size_t stride = e_hat.size() / M;
  const auto v = e_hat.values();
  for (double u : u_values) {
    if (!(u > 0.0)) throw PreconditionError("u values must be positive");
    const int m = grid_shift(grid, u);
    const double ueta = std::pow(u, eta);
    const double worst = deterministic_max(e_hat.size(), [&](std::size_t i) {
      const long long i0 = static_cast<long long>(i / stride);
      const std::size_t r = i % stride;
      const std::size_t ip = wrap(i0 + m, M), im = wrap(i0 - m, M);
      const double num = std::abs(v[ip * stride + r] - v[im * stride + r]);
      if (num == 0.0) return 0.0;
      std::vector<double> k(d);
      e_hat.node_of(i, k);
      double rest = 0.0;
      for (int j = 1; j < d; ++j) rest += k[j] * k[j];
      const double kp = grid.node(static_cast<int>(ip)), km = grid.node(static_cast<int>(im));
      const double den =
          ueta * (std::pow(kp * kp + rest, rep.exponent / 2) + std::pow(km * km + rest, rep.exponent / 2));
      return den > 0.0 ? num / den : 0.0;
    });
    if (worst > rep.max_ratio) {
      rep.max_ratio = worst;
      rep.worst_u = u;
    }
  }
  return rep;
}

DifferenceQuotientReport difference_quotient_check(const SpectralField& g, const std::vector<SpectralField>& gradient,
                                                   double p, double eta, const std::vector<double>& u_values) {
  const int d = g.grid().dim();
  if (!(p >= 1.0 && p < d)) throw PreconditionError("difference quotient check needs 1 <= p < d");
  if (!(eta >= 0.0 && eta <= 1.0)) throw PreconditionError("eta must lie in [0, 1]");
  if (static_cast<int>(gradient.size()) != d) throw PreconditionError("gradient needs one field per axis");
  DifferenceQuotientReport rep;
  rep.p = p;
  rep.p_eta = 1.0 / (1.0 / p - (1.0 - eta) / d);
  double s = std::pow(lp_norm(g, p), p);
  for (const SpectralField& dg : gradient) s += std::pow(lp_norm(dg, p), p);
  rep.sobolev_norm = std::pow(s, 1.0 / p);
  rep.u_values = u_values;
  for (double u : u_values) {
    if (!(u > 0.0)) throw PreconditionError("u values must be positive");
    const double num = u_shift_norm(g, grid_shift(g.grid(), u), rep.p_eta);
    const double ratio = rep.sobolev_norm > 0.0 ? num / (std::pow(u, eta) * rep.sobolev_norm) : 0.0;
    rep.ratios.push_back(ratio);
    rep.max_ratio = std::max(rep.max_ratio, ratio);
  }
  return rep;
}

DifferenceQuotientReport difference_quotient_check(const LatticeFunction& g, const TorusGrid& grid, double p,
                                                   double eta, const std::vector<double>& u_values) {
  const int d = grid.dim();
  // derivatives along every axis, so the trailing axes cannot stay symmetric
  const LatticeFunction box = g.to_box();
  std::vector<SpectralField> grad;
  for (int j = 0; j < d; ++j) grad.push_back(spectral_derivative(box, MultiIndex::axis(d, j, 1), grid));
  return difference_quotient_check(forward_transform(box, grid), grad, p, eta, u_values);
}

ShiftedDecayReport shifted_decay_bound(const LatticeFunction& h, double a, double eta, double hat_norm,
                                       const std::vector<double>& K_alphas,
                                       const std::vector<double>& hat_alpha_norms, double r_min, double r_max) {
  const double frac = a - std::floor(a);
  if (!(a > 0.0) || frac == 0.0) throw PreconditionError("decay exponent a must be positive and non-integer");
  if (!(eta > frac && eta < 1.0))
    throw PreconditionError("eta must lie in (a - floor(a), 1) = (" + std::to_string(frac) + ", 1)");
  if (K_alphas.empty() || K_alphas.size() != hat_alpha_norms.size())
    throw PreconditionError("need one K_alpha and one ||h^_alpha||_1 per multi-index");
  if (!(r_min >= 1.0 && r_min < r_max && r_max <= h.radius()))
    throw PreconditionError("annulus must satisfy 1 <= r_min < r_max <= R");
  ShiftedDecayReport rep;
  rep.a = a;
  rep.eta = eta;
  double worst = 0.0;
  for (std::size_t j = 0; j < K_alphas.size(); ++j) worst = std::max(worst, K_alphas[j] + hat_alpha_norms[j]);
  rep.rhs = hat_norm + worst;

  // per integer shell: max scaled value and the radius where it sits
  std::map<int, std::pair<double, double>> shells;
  h.for_each([&](std::span<const int> x, double, double v) {
    double r2 = 0.0;
    for (int c : x) r2 += static_cast<double>(c) * c;
    const double r = std::sqrt(r2);
    if (r < r_min || r > r_max) return;
    const double s = std::abs(v) * std::pow(std::max(r, 1.0), a);
    auto& cell = shells[static_cast<int>(std::floor(r))];
    if (s > cell.first) cell = {s, r};
    rep.scaled_max = std::max(rep.scaled_max, s);
  });
  if (rep.scaled_max == 0.0) {
    rep.zero = true;
    return rep;
  }
  rep.constant = rep.rhs > 0.0 ? rep.scaled_max / rep.rhs : std::numeric_limits<double>::infinity();
  std::vector<double> lr, ls;
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& [bin, cell] : shells) {
    if (!(cell.first > 0.0)) continue;
    lr.push_back(std::log(cell.second));
    ls.push_back(std::log(cell.first));
    lo = std::min(lo, cell.first);
  }
  rep.spread = rep.scaled_max / lo;
  if (lr.size() >= 2) rep.trend = linear_fit(lr, ls).slope;
  return rep;
}

}  // namespace latdeconv
