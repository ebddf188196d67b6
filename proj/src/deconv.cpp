#include "latdeconv/deconv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "latdeconv/common.hpp"
#include "latdeconv/fit.hpp"
#include "latdeconv/green.hpp"
#include "latdeconv/parallel.hpp"

namespace latdeconv {

CriticalConstants critical_constants(const LatticeFunction& F, double criticality_tol) {
  if (!check_symmetry(F).symmetric) throw PreconditionError("F must be symmetric");
  CriticalConstants c;
  const double f0 = moment(F, 0.0);
  if (f0 < -criticality_tol) throw PreconditionError("F^(0) < 0 violates the assumption");
  c.critical = std::abs(f0) <= criticality_tol;
  c.F_hat_zero = c.critical ? 0.0 : f0;
  c.K_F_second = -moment(F, 2.0);
  const double denom = c.F_hat_zero + c.K_F_second;
  if (!(denom > 0.0)) throw PreconditionError("F^(0) + K''_F <= 0, lambda is undefined");
  c.lambda = 1.0 / denom;
  c.mu = c.critical ? 1.0 : 1.0 - c.lambda * c.F_hat_zero;
  if (!(c.mu > 0.0 && c.mu <= 1.0)) throw PreconditionError("mu falls outside (0, 1]");
  return c;
}

ErrorKernel error_kernel(const LatticeFunction& F, const CriticalConstants& c, double tol) {
  const int d = F.dim();
  const Layout layout = F.layout();
  const LatticeFunction A = LatticeFunction::delta(d, layout) - c.mu * LatticeFunction::nearest_neighbour(d, layout);
  ErrorKernel ek;
  ek.E = A - c.lambda * F;
  ek.zeroth = moment(ek.E, 0.0);
  ek.second = moment(ek.E, 2.0);
  ek.scale = moment(ek.E, 2.0, true);
  if (std::abs(ek.zeroth) > tol * ek.scale || std::abs(ek.second) > tol * ek.scale) {
    std::ostringstream os;
    os << "error kernel moments do not vanish: sum E = " << ek.zeroth << ", sum |x|^2 E = " << ek.second
       << " (scale " << ek.scale << ")";
    throw InvariantError(os.str());
  }
  return ek;
}

const char* to_string(Directions d) {
  switch (d) {
    case Directions::all: return "all";
    case Directions::axis: return "axis";
    case Directions::diagonal: return "diagonal";
  }
  return "?";
}

DecayFit decay_fit(const LatticeFunction& f, double r_min, double r_max, Directions directions) {
  if (!(r_min >= 1.0 && r_min < r_max)) throw PreconditionError("decay window needs 1 <= r_min < r_max");
  if (r_max > f.radius()) throw PreconditionError("decay window extends past the box");
  const int d = f.dim();
  DecayFit fit;
  fit.r_min = r_min;
  fit.r_max = r_max;
  fit.directions = directions;

  std::vector<double> lx, ly, w;
  std::map<long long, double> shell_max;
  auto take = [&](std::span<const int> x, double weight, double v) {
    long long r2 = 0;
    for (int c : x) r2 += static_cast<long long>(c) * c;
    const double r = std::sqrt(static_cast<double>(r2));
    if (r < r_min || r > r_max || v == 0.0) return;
    lx.push_back(std::log(r));
    ly.push_back(std::log(std::abs(v)));
    w.push_back(weight);
    auto& m = shell_max[r2];
    m = std::max(m, std::abs(v));
  };
  std::vector<int> x(d, 0);
  switch (directions) {
    case Directions::all:
      f.for_each(take);
      break;
    case Directions::axis:
      for (int t = 1; t <= f.radius(); ++t) {
        x[0] = t;
        take(x, 1.0, f(x));
      }
      break;
    case Directions::diagonal:
      for (int t = 1; t <= f.radius(); ++t) {
        std::fill(x.begin(), x.end(), t);
        take(x, 1.0, f(x));
      }
      break;
  }
  if (lx.empty()) {
    fit.zero_function = true;
    fit.exponent = fit.envelope_exponent = std::numeric_limits<double>::infinity();
    return fit;
  }
  fit.radii = static_cast<int>(shell_max.size());
  if (fit.radii < 8)
    throw PreconditionError("decay fit needs at least 8 radii with f != 0, window has " + std::to_string(fit.radii));
  const LinearFit lf = linear_fit(lx, ly, w);
  fit.exponent = -lf.slope;
  fit.amplitude = std::exp(lf.intercept);
  fit.r_squared = lf.r_squared;
  fit.points = static_cast<int>(lx.size());
  std::vector<double> sx, sy;
  for (const auto& [r2, m] : shell_max) {
    sx.push_back(0.5 * std::log(static_cast<double>(r2)));
    sy.push_back(std::log(m));
  }
  fit.envelope_exponent = -linear_fit(sx, sy).slope;
  return fit;
}

namespace {

struct SupportPoint {
  std::vector<int> x;
  double value;
};

std::vector<SupportPoint> expand_support(const LatticeFunction& F) {
  std::vector<SupportPoint> pts;
  F.for_each([&](std::span<const int> x, double, double v) {
    if (v == 0.0) return;
    if (F.layout() == Layout::box) {
      pts.push_back({std::vector<int>(x.begin(), x.end()), v});
    } else {
      for_each_orbit_point(x, [&](std::span<const int> p) { pts.push_back({std::vector<int>(p.begin(), p.end()), v}); });
    }
  });
  return pts;
}

int support_radius(const LatticeFunction& F) {
  int r = 0;
  F.for_each([&](std::span<const int> x, double, double v) {
    if (v == 0.0) return;
    for (int c : x) r = std::max(r, std::abs(c));
  });
  return r;
}

/// sup |F * G - delta| over storage entries of G whose points stay inside
/// [-(R - R_F), R - R_F]^d, where F * G needs no values outside the box.
void torus_residual(const LatticeFunction& F, const LatticeFunction& G, double work,
                    DeconvolutionResult& out) {
  const int d = G.dim();
  const int inner = G.radius() - support_radius(F);
  if (inner < 0) throw PreconditionError("kernel support is wider than the solution box");
  const std::vector<SupportPoint> support = expand_support(F);
  std::vector<std::size_t> candidates;
  std::vector<int> x(d);
  for (std::size_t i = 0; i < G.size(); ++i) {
    G.point_of(i, x);
    int m = 0;
    for (int c : x) m = std::max(m, std::abs(c));
    if (m <= inner) candidates.push_back(i);
  }
  const std::size_t affordable =
      std::max<std::size_t>(2, static_cast<std::size_t>(work / std::max<double>(1.0, support.size())));
  std::vector<std::size_t> chosen;
  if (candidates.size() <= affordable) {
    chosen = candidates;
    out.residual_complete = true;
  } else {
    // evenly spaced in storage order, always including the first and last entry
    for (std::size_t j = 0; j < affordable; ++j)
      chosen.push_back(candidates[j * (candidates.size() - 1) / (affordable - 1)]);
  }
  out.residual_points = chosen.size();
  std::vector<double> res(chosen.size());
  parallel_for(chosen.size(), [&](std::size_t b, std::size_t e) {
    std::vector<int> p(d), q(d);
    for (std::size_t j = b; j < e; ++j) {
      G.point_of(chosen[j], p);
      KahanSum s;
      for (const SupportPoint& sp : support) {
        for (int c = 0; c < d; ++c) q[c] = p[c] - sp.x[c];
        s += sp.value * G(q);
      }
      bool origin = true;
      for (int c : p) origin = origin && c == 0;
      res[j] = std::abs(s.value() - (origin ? 1.0 : 0.0));
    }
  });
  out.torus_residual = 0.0;
  for (double r : res) out.torus_residual = std::max(out.torus_residual, r);
}

AmplitudeCheck amplitude_check(const LatticeFunction& G, int radius, double K2) {
  const int d = G.dim();
  AmplitudeCheck a;
  a.radius = radius;
  a.predicted = a_d(d) / K2;
  const double scale = std::pow(static_cast<double>(radius), d - 2) / a.predicted;
  std::vector<int> x(d, 0);
  x[0] = radius;
  a.axis_ratio = G(x) * scale;
  const long long r2 = static_cast<long long>(radius) * radius;
  KahanSum sum, count;
  G.for_each([&](std::span<const int> p, double weight, double v) {
    long long s = 0;
    for (int c : p) s += static_cast<long long>(c) * c;
    if (s != r2) return;
    sum += weight * v;
    count += weight;
  });
  a.shell_ratio = sum.value() / count.value() * scale;
  return a;
}

LatticeFunction torus_green(int d, double mu, int R, const TorusGrid& grid) {
  GreenSpec spec;
  spec.dim = d;
  spec.mu = mu;
  spec.box_radius = R;
  spec.periodization = Periodization::raw;
  return green_function(spec, grid);
}

double split_residual(const LatticeFunction& F, const LatticeFunction& E, double lambda, double mu,
                      const TorusGrid& grid) {
  const int d = F.dim();
  const LatticeFunction A = LatticeFunction::delta(d, F.layout()) - mu * LatticeFunction::nearest_neighbour(d, F.layout());
  const SpectralField Fh = forward_transform(F, grid);
  const SpectralField Ah = forward_transform(A, grid);
  const SpectralField Eh = forward_transform(E, grid);
  const SpectralField Gh = Fh.reciprocal(), Ch = Ah.reciprocal();
  const SpectralField rhs = Eh / (Ah * Fh);
  const auto g = Gh.values(), c = Ch.values(), r = rhs.values();
  return deterministic_max(g.size(), [&](std::size_t i) {
    const double scale = std::abs(g[i]) + lambda * std::abs(c[i]);
    return std::abs(g[i] - lambda * c[i] - r[i]) / scale;
  });
}

}  // namespace

DeconvolutionResult deconvolve(const LatticeFunction& F, int R, const TorusGrid& grid, const DeconvOptions& options) {
  const int d = F.dim();
  if (d <= 2) throw PreconditionError("d > 2 required");
  if (grid.dim() != d) throw PreconditionError("grid dimension differs from the kernel");
  if (!grid.shifted()) throw PreconditionError("deconvolution needs a shifted grid");
  if (grid.points() < 2 * R + 1) throw PreconditionError("grid must have at least 2R+1 points per axis");

  DeconvolutionResult out;
  out.constants = critical_constants(F);
  out.error = error_kernel(F, out.constants);
  const CriticalConstants& c = out.constants;

  out.G = inverse_on_box(forward_transform(F, grid), R, true);
  out.C = torus_green(d, c.mu, R, grid);
  out.f = out.G - c.lambda * out.C;
  out.f_sup = out.f.sup_norm();

  torus_residual(F, out.G, options.residual_work, out);
  if (!(out.torus_residual <= 1e-11)) {
    std::ostringstream os;
    os << "torus identity F * G = delta fails: residual " << out.torus_residual;
    throw InvariantError(os.str());
  }
  out.split_residual = split_residual(F, out.error.E, c.lambda, c.mu, grid);
  if (!(out.split_residual <= 1e-10)) {
    std::ostringstream os;
    os << "Fourier split G^ - lambda C^ = E^/(A^ F^) fails: relative residual " << out.split_residual;
    throw InvariantError(os.str());
  }

  const double r_min = options.r_min.value_or(R / 4.0);
  const double r_max = options.r_max.value_or(R / 2.0);
  auto try_fit = [&](const LatticeFunction& f, Directions dir) -> std::optional<DecayFit> {
    try {
      return decay_fit(f, r_min, r_max, dir);
    } catch (const PreconditionError&) {
      return std::nullopt;
    }
  };
  out.fit_all = try_fit(out.f, Directions::all);
  out.fit_axis = try_fit(out.f, Directions::axis);
  out.fit_diagonal = try_fit(out.f, Directions::diagonal);

  const int amp_r = static_cast<int>(std::lround(options.amplitude_radius.value_or(R / 3.0)));
  if (amp_r >= 1 && amp_r <= R) out.amplitude = amplitude_check(out.G, amp_r, c.K_F_second);

  if (options.refine && grid.points() % 4 == 0) {
    const int Mc = grid.points() / 2;
    const int Rc = static_cast<int>(std::ceil(std::max(r_max, static_cast<double>(amp_r))));
    if (2 * Rc + 1 <= Mc) {
      const TorusGrid coarse(d, Mc, true);
      const LatticeFunction Gc = inverse_on_box(forward_transform(F, coarse), Rc, true);
      const LatticeFunction fc = Gc - c.lambda * torus_green(d, c.mu, Rc, coarse);
      Refinement ref;
      ref.coarse_points = Mc;
      if (amp_r >= 1) {
        const AmplitudeCheck ac = amplitude_check(Gc, amp_r, c.K_F_second);
        ref.amplitude_change = std::abs(ac.axis_ratio - out.amplitude.axis_ratio) / std::abs(out.amplitude.axis_ratio);
      }
      const std::optional<DecayFit> fcfit = try_fit(fc, Directions::all);
      if (fcfit && out.fit_all && !fcfit->zero_function && !out.fit_all->zero_function)
        ref.exponent_change = std::abs(fcfit->exponent - out.fit_all->exponent);
      out.refinement = ref;
    }
  }
  return out;
}

DerivativeBound error_derivative_bound(const LatticeFunction& E, const MultiIndex& alpha, double sigma,
                                       const TorusGrid& grid) {
  if (!(sigma > 0.0 && sigma <= 2.0)) throw PreconditionError("sigma must lie in (0, 2]");
  const SpectralField Ea = spectral_derivative(E, alpha, grid);
  const double p = 2.0 + sigma - alpha.order();
  const int d = grid.dim();
  DerivativeBound b;
  b.exponent = p;
  std::vector<double> k(d);
  const auto v = Ea.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    Ea.node_of(i, k);
    double k2 = 0.0;
    for (double c : k) k2 += c * c;
    if (k2 == 0.0) continue;
    const double ratio = std::abs(v[i]) / std::pow(k2, 0.5 * p);
    if (ratio > b.max_ratio) {
      b.max_ratio = ratio;
      b.argmax = k;
    }
  }
  return b;
}

namespace {

/// Derivatives 0..n along axis 1 of 1/v^ from those of v^.
std::vector<SpectralField> reciprocal_derivatives(const std::vector<SpectralField>& v) {
  const int n = static_cast<int>(v.size()) - 1;
  std::vector<SpectralField> h{v[0].reciprocal()};
  for (int m = 1; m <= n; ++m) {
    SpectralField acc = v[1] * h[m - 1];
    acc *= static_cast<double>(m);
    double binom = m;
    for (int j = 2; j <= m; ++j) {
      binom = binom * (m - j + 1) / j;
      SpectralField term = v[j] * h[m - j];
      term *= binom;
      acc = acc + term;
    }
    h.push_back(-1.0 * (h[0] * acc));
  }
  return h;
}

std::vector<SpectralField> axis_derivatives(const LatticeFunction& f, int n, const TorusGrid& grid) {
  std::vector<SpectralField> out;
  for (int j = 0; j <= n; ++j)
    out.push_back(spectral_derivative(f, MultiIndex::axis(f.dim(), 0, j), grid, TransformPath::automatic, 1));
  return out;
}

}  // namespace

SpectralField error_term_axis_derivative(const LatticeFunction& F, int order, const TorusGrid& grid) {
  if (order < 0) throw PreconditionError("derivative order must be nonnegative");
  if (F.dim() != grid.dim()) throw PreconditionError("kernel and grid dimensions differ");
  const CriticalConstants c = critical_constants(F);
  const int d = F.dim();
  const LatticeFunction A = LatticeFunction::delta(d) - c.mu * LatticeFunction::nearest_neighbour(d);
  const SpectralField hF = reciprocal_derivatives(axis_derivatives(F, order, grid)).back();
  SpectralField hA = reciprocal_derivatives(axis_derivatives(A, order, grid)).back();
  hA *= c.lambda;
  return hF - hA;
}

InhomogeneousResult inhomogeneous_solve(const LatticeFunction& F, const LatticeFunction& g, int R,
                                        const TorusGrid& grid, const InhomogeneousOptions& options) {
  const int d = F.dim();
  if (g.dim() != d || grid.dim() != d) throw PreconditionError("dimension mismatch");
  if (!grid.shifted()) throw PreconditionError("inhomogeneous solve needs a shifted grid");
  if (grid.points() < 2 * R + 1) throw PreconditionError("grid must have at least 2R+1 points per axis");
  const CriticalConstants c = critical_constants(F);
  if (!c.critical) throw PreconditionError("inhomogeneous solve needs a critical kernel (F^(0) = 0)");
  if (!check_symmetry(g).symmetric) throw PreconditionError("g must be symmetric");
  const int Rg = support_radius(g);
  if (Rg > R / 2) throw PreconditionError("g is wider than half the solution box");
  if (g.radius() >= 2) {
    try {
      const DecayEnvelope env = fit_envelope(g, 2.0, g.radius());
      const double need = d + std::min(options.rho, 2.0);
      if (!env.zero_window && env.b < need - 1e-9)
        throw PreconditionError("g decays like <x>^-" + std::to_string(env.b) + ", slower than required " +
                                std::to_string(need));
    } catch (const PreconditionError& e) {
      // too few radii to fit means g is effectively compact
      if (std::string(e.what()).rfind("g decays", 0) == 0) throw;
    }
  }

  InhomogeneousResult out;
  const SpectralField Fh = forward_transform(F, grid);
  const SpectralField Gh = Fh.reciprocal();
  out.H = inverse_on_box(forward_transform(g, grid) * Gh, R, false);
  const LatticeFunction G = inverse_on_box(Fh, R, true);
  const LatticeFunction gG = convolve(g, G);
  const int half = R / 2;
  out.cross_check = 0.0;
  out.H.for_each([&](std::span<const int> x, double, double v) {
    for (int cc : x)
      if (std::abs(cc) > half) return;
    out.cross_check = std::max(out.cross_check, std::abs(v - gG(x)));
  });

  out.predicted = a_d(d) * moment(g, 0.0) / c.K_F_second;
  out.r_min = options.r_min.value_or(R / 4.0);
  out.r_max = options.r_max.value_or(R / 2.0);
  out.min_ratio = std::numeric_limits<double>::infinity();
  out.max_ratio = -std::numeric_limits<double>::infinity();
  out.H.for_each([&](std::span<const int> x, double, double v) {
    long long r2 = 0;
    for (int cc : x) r2 += static_cast<long long>(cc) * cc;
    const double r = std::sqrt(static_cast<double>(r2));
    if (r < out.r_min || r > out.r_max) return;
    const double ratio = v * std::pow(r, d - 2) / out.predicted;
    out.min_ratio = std::min(out.min_ratio, ratio);
    out.max_ratio = std::max(out.max_ratio, ratio);
  });
  return out;
}

}  // namespace latdeconv
