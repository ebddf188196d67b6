#include <cmath>
#include <complex>

#include "doctest.h"
#include "latdeconv/common.hpp"
#include "latdeconv/deconv.hpp"
#include "latdeconv/green.hpp"
#include "latdeconv/models.hpp"

using namespace latdeconv;

namespace {

struct QuietWarnings {
  QuietWarnings() { set_warning_handler(nullptr); }
};
const QuietWarnings quiet;

LatticeFunction synthetic(int d, double rho, double eps, int tail) {
  ModelSpec s;
  s.kind = ModelKind::perturbed;
  s.d = d;
  s.rho = rho;
  s.epsilon = eps;
  s.tail_radius = tail;
  return perturbed_kernel(s).F;
}

}  // namespace

TEST_CASE("critical constants") {
  SUBCASE("simple random walk family") {
    for (double mu0 : {0.25, 0.5, 0.75, 1.0}) {
      const CriticalConstants c = critical_constants(srw_kernel(3, mu0));
      CHECK(c.lambda == doctest::Approx(1.0).epsilon(1e-15));
      CHECK(c.mu == doctest::Approx(mu0).epsilon(1e-15));
      CHECK(c.K_F_second == doctest::Approx(mu0).epsilon(1e-15));
      CHECK(c.critical == (mu0 == 1.0));
    }
  }
  SUBCASE("synthetic critical perturbation") {
    const LatticeFunction F = synthetic(5, 2.0, 0.05, 8);
    const CriticalConstants c = critical_constants(F);
    CHECK(c.mu == 1.0);
    CHECK(c.critical);
    CHECK(c.K_F_second < 1.0);
    CHECK(c.lambda == doctest::Approx(1.0 / c.K_F_second).epsilon(1e-15));
  }
  SUBCASE("scaling F by 2 halves lambda and keeps E") {
    const LatticeFunction F = synthetic(4, 1.0, 0.05, 6);
    const CriticalConstants c1 = critical_constants(F), c2 = critical_constants(2.0 * F);
    CHECK(c2.lambda == doctest::Approx(0.5 * c1.lambda).epsilon(1e-14));
    const ErrorKernel e1 = error_kernel(F, c1), e2 = error_kernel(2.0 * F, c2);
    CHECK((e1.E - e2.E).sup_norm() < 1e-15);
  }
  CHECK_THROWS_AS(critical_constants(-1.0 * LatticeFunction::delta(3)), PreconditionError);
  // F^(0) > 0 but K'' so negative that the denominator is not positive
  const LatticeFunction bad = LatticeFunction::delta(3) + 2.0 * LatticeFunction::nearest_neighbour(3);
  CHECK_THROWS_AS(critical_constants(bad), PreconditionError);
}

TEST_CASE("error kernel moments") {
  const LatticeFunction S = srw_kernel(3, 0.5);
  const ErrorKernel e0 = error_kernel(S, critical_constants(S));
  CHECK(e0.E.sup_norm() == 0.0);
  for (auto [d, rho] : {std::pair{3, 0.5}, std::pair{5, 2.0}, std::pair{9, 1.0}}) {
    const LatticeFunction F = synthetic(d, rho, 0.05, d == 9 ? 5 : 8);
    const ErrorKernel e = error_kernel(F, critical_constants(F));
    CHECK(std::abs(e.zeroth) <= 1e-12 * e.scale);
    CHECK(std::abs(e.second) <= 1e-12 * e.scale);
    CHECK(e.E.sup_norm() > 0.0);
  }
  // inconsistent constants are caught
  const LatticeFunction F = synthetic(4, 1.0, 0.05, 6);
  CriticalConstants c = critical_constants(F);
  c.lambda *= 1.01;
  CHECK_THROWS_AS(error_kernel(F, c), InvariantError);
}

TEST_CASE("decay fit") {
  const LatticeFunction p = LatticeFunction::from_function(4, 20, Layout::orbits, [](std::span<const int> x) {
    double r2 = 0;
    for (int c : x) r2 += c * c;
    return std::pow(std::max(r2, 1.0), -2.0);
  });
  for (Directions dir : {Directions::all, Directions::axis}) {
    const DecayFit fit = decay_fit(p, 4.0, 16.0, dir);
    CHECK(fit.exponent == doctest::Approx(4.0).epsilon(1e-9));
    CHECK(fit.envelope_exponent == doctest::Approx(4.0).epsilon(1e-9));
    CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(decay_fit(p, 2.0, 20.0, Directions::diagonal).exponent == doctest::Approx(4.0).epsilon(1e-9));
  const DecayFit z = decay_fit(LatticeFunction::zeros(3, 10, Layout::orbits), 2.0, 8.0);
  CHECK(z.zero_function);
  CHECK(std::isinf(z.exponent));
  CHECK_THROWS_AS(decay_fit(p, 4.0, 6.0, Directions::axis), PreconditionError);
  CHECK_THROWS_AS(decay_fit(p, 4.0, 30.0), PreconditionError);
}

TEST_CASE("trivial family is solved exactly") {
  for (int d : {3, 4, 5})
    for (double mu0 : {0.25, 0.5, 0.75, 1.0}) {
      const int R = d == 5 ? 6 : 10;
      const DeconvolutionResult r = deconvolve(srw_kernel(d, mu0), R, TorusGrid(d, 4 * R, true));
      CHECK(r.constants.lambda == doctest::Approx(1.0).epsilon(1e-15));
      CHECK(r.error.E.sup_norm() <= 1e-15);
      CHECK(r.f_sup <= 1e-12);
      CHECK(r.torus_residual <= 1e-11);
      CHECK(r.residual_complete);
      REQUIRE(r.fit_all);
      CHECK(r.fit_all->zero_function);
    }
}

TEST_CASE("synthetic critical kernel") {
  const int R = 16;
  const LatticeFunction F = synthetic(5, 2.0, 0.05, 8);
  const DeconvolutionResult r = deconvolve(F, R, TorusGrid(5, 64, true));
  CHECK(r.torus_residual <= 1e-11);
  CHECK(r.split_residual <= 1e-10);
  CHECK(r.f_sup > 0.0);
  // G = lambda C + f by construction
  CHECK((r.G - (r.constants.lambda * r.C + r.f)).sup_norm() <= 1e-15);
  REQUIRE(r.fit_all);
  CHECK(r.fit_all->exponent > 3.0);
  CHECK(r.fit_all->envelope_exponent > 3.0);
  CHECK(r.amplitude.radius == 5);
  CHECK(std::abs(r.amplitude.shell_ratio - 1.0) < 0.1);

  SUBCASE("scaling covariance") {
    const DeconvolutionResult r2 = deconvolve(2.0 * F, R, TorusGrid(5, 64, true));
    CHECK((2.0 * r2.G - r.G).sup_norm() <= 1e-12 * r.G.sup_norm());
    CHECK((2.0 * r2.f - r.f).sup_norm() <= 1e-12 * r.G.sup_norm());
    CHECK(std::abs(r2.fit_all->exponent - r.fit_all->exponent) < 1e-6);
    CHECK(r2.fit_all->amplitude == doctest::Approx(0.5 * r.fit_all->amplitude).epsilon(1e-6));
  }
}

TEST_CASE("subcritical family stays uniformly bounded") {
  // F = delta - D + m delta with F^(0) = m decreasing to 0
  double worst = 0.0;
  for (double m : {0.1, 0.01, 0.001, 0.0}) {
    const LatticeFunction F = srw_kernel(3, 1.0) + m * LatticeFunction::delta(3);
    const DeconvolutionResult r = deconvolve(F, 12, TorusGrid(3, 48, true));
    r.G.for_each([&](std::span<const int> x, double, double v) {
      double r2 = 0;
      for (int c : x) r2 += c * c;
      worst = std::max(worst, std::abs(v) * std::max(std::sqrt(r2), 1.0));
    });
  }
  CHECK(worst < 2.0);
}

TEST_CASE("deconvolve preconditions") {
  CHECK_THROWS_AS(deconvolve(srw_kernel(3, 1.0), 8, TorusGrid(3, 32, false)), PreconditionError);
  CHECK_THROWS_AS(deconvolve(srw_kernel(3, 1.0), 8, TorusGrid(3, 16, true)), PreconditionError);
}

TEST_CASE("derivative bound on the error kernel") {
  const LatticeFunction F = synthetic(5, 2.0, 0.05, 8);
  const ErrorKernel e = error_kernel(F, critical_constants(F));
  for (int order : {0, 1, 2, 3}) {
    const MultiIndex a = MultiIndex::axis(5, 0, order);
    const DerivativeBound b32 = error_derivative_bound(e.E, a, 1.8, TorusGrid(5, 32, false));
    const DerivativeBound b64 = error_derivative_bound(e.E, a, 1.8, TorusGrid(5, 64, false));
    CHECK(std::isfinite(b64.max_ratio));
    CHECK(b64.max_ratio > 0.0);
    CHECK(std::abs(b64.max_ratio / b32.max_ratio - 1.0) < 0.05);
  }
  const ErrorKernel zero = error_kernel(srw_kernel(4, 1.0), critical_constants(srw_kernel(4, 1.0)));
  CHECK(error_derivative_bound(zero.E, MultiIndex::axis(4, 0, 2), 1.0, TorusGrid(4, 16, true)).max_ratio == 0.0);
}

TEST_CASE("inhomogeneous solve") {
  const int R = 12;
  const TorusGrid grid(4, 48, true);
  const LatticeFunction F = srw_kernel(4, 1.0);
  const InhomogeneousResult h1 = inhomogeneous_solve(F, LatticeFunction::delta(4), R, grid);
  const LatticeFunction G = deconvolve(F, R, grid).G;
  CHECK((h1.H - G).sup_norm() <= 1e-14 * G.sup_norm());
  CHECK(h1.cross_check <= 1e-11);

  const InhomogeneousResult h2 = inhomogeneous_solve(F, 2.0 * LatticeFunction::delta(4), R, grid);
  CHECK(h2.predicted == doctest::Approx(2.0 * h1.predicted).epsilon(1e-15));
  CHECK((h2.H - 2.0 * h1.H).sup_norm() <= 1e-13);

  const InhomogeneousResult hD = inhomogeneous_solve(F, LatticeFunction::nearest_neighbour(4), R, grid);
  CHECK(hD.cross_check <= 1e-11);
  CHECK(hD.min_ratio > 0.8);
  CHECK(hD.max_ratio < 1.2);

  CHECK_THROWS_AS(inhomogeneous_solve(srw_kernel(4, 0.5), LatticeFunction::delta(4), R, grid), PreconditionError);
  LatticeFunction asym = LatticeFunction::zeros(4, 1);
  asym.set({1, 0, 0, 0}, 1.0);
  CHECK_THROWS_AS(inhomogeneous_solve(F, asym, R, grid), PreconditionError);
  // g decaying like <x>^-4 in d = 4 is slower than d + rho ^ 2
  const LatticeFunction slow = LatticeFunction::from_function(4, 6, Layout::orbits, [](std::span<const int> x) {
    double r2 = 0;
    for (int c : x) r2 += c * c;
    return std::pow(std::max(r2, 1.0), -2.0);
  });
  CHECK_THROWS_AS(inhomogeneous_solve(F, slow, R, grid), PreconditionError);
}

TEST_CASE("error term axis derivatives against a closed form") {
  // F = A + eps A*A with A = delta - D has lambda = 1, mu = 1 and
  // f^ = 1/F^ - 1/A^ = -eps / (1 + eps A^), a smooth function of k.
  const int d = 4;
  const double eps = 0.3;
  const LatticeFunction A = srw_kernel(d, 1.0);
  const LatticeFunction F = A + eps * convolve(A, A);
  const CriticalConstants cc = critical_constants(F);
  CHECK(cc.lambda == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(cc.mu == 1.0);

  const TorusGrid grid(d, 16, true);
  std::vector<double> k(d);
  for (int order = 0; order <= 3; ++order) {
    CAPTURE(order);
    const SpectralField h = error_term_axis_derivative(F, order, grid);
    double worst = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
      h.node_of(i, k);
      double Ahat = 1.0;
      for (double kj : k) Ahat -= std::cos(kj) / d;
      const double a = 1.0 + eps * Ahat;
      const double a1 = eps * std::sin(k[0]) / d, a2 = eps * std::cos(k[0]) / d, a3 = -a1;
      // derivatives of 1/a in k_1
      const double inv[4] = {1.0 / a, -a1 / (a * a), -a2 / (a * a) + 2.0 * a1 * a1 / (a * a * a),
                             -a3 / (a * a) + 6.0 * a1 * a2 / (a * a * a) - 6.0 * a1 * a1 * a1 / (a * a * a * a)};
      // both reciprocals grow like |k|^{-2-n}; the difference cancels that much
      double k2 = 0.0;
      for (double kj : k) k2 += kj * kj;
      const double scale = std::pow(k2, -0.5 * (2 + order));
      worst = std::max(worst, std::abs(h.values()[i] - std::complex<double>(-eps * inv[order], 0.0)) / scale);
    }
    CHECK(worst < 1e-11);
  }
  // trivial family: f = 0 at every order
  CHECK(error_term_axis_derivative(A, 2, grid).max_abs() < 1e-12);
  CHECK_THROWS_AS(error_term_axis_derivative(F, 1, TorusGrid(d, 16, false)), PreconditionError);
}
