#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "latdeconv/common.hpp"
#include "latdeconv/lattice.hpp"
#include "latdeconv/spectral.hpp"

using namespace latdeconv;
using std::numbers::pi;

namespace {

LatticeFunction random_orbits(int d, int R, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return LatticeFunction::from_function(d, R, Layout::orbits, [&](std::span<const int>) { return u(rng); });
}

LatticeFunction random_box(int d, int R, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return LatticeFunction::from_function(d, R, Layout::box, [&](std::span<const int>) { return u(rng); });
}

double max_diff(const SpectralField& a, const SpectralField& b) {
  const SpectralField da = a.to_dense(), db = b.to_dense();
  double m = 0;
  for (std::size_t i = 0; i < da.size(); ++i) m = std::max(m, std::abs(da.values()[i] - db.values()[i]));
  return m;
}

double max_diff(const LatticeFunction& a, const LatticeFunction& b) {
  const LatticeFunction ab = a.to_box();
  std::vector<int> x(a.dim());
  double m = 0;
  for (std::size_t i = 0; i < ab.size(); ++i) {
    ab.point_of(i, x);
    m = std::max(m, std::abs(ab.values()[i] - b(x)));
  }
  return m;
}

LatticeFunction critical_srw(int d) {
  return LatticeFunction::delta(d) - LatticeFunction::nearest_neighbour(d);
}

}  // namespace

TEST_CASE("grid nodes") {
  const TorusGrid g(2, 8, true);
  for (int i = 0; i < 8; ++i) {
    CHECK(g.node(i) != 0.0);
    CHECK(g.node(i) > -pi);
    CHECK(g.node(i) <= pi);
    CHECK(g.half_node(g.half_index(i)) == doctest::Approx(std::abs(g.node(i))));
  }
  const TorusGrid u(2, 8, false);
  CHECK(u.node(0) == 0.0);
  CHECK(u.node(4) == doctest::Approx(pi));
  for (int i = 0; i < 8; ++i) CHECK(u.half_node(u.half_index(i)) == doctest::Approx(std::abs(u.node(i))));
  CHECK_THROWS_AS(TorusGrid(2, 7, true), PreconditionError);
}

TEST_CASE("forward transform examples") {
  for (bool shifted : {true, false}) {
    const TorusGrid g(3, 8, shifted);
    const SpectralField one = forward_transform(LatticeFunction::delta(3), g);
    for (auto v : one.values()) CHECK(std::abs(v - cplx(1.0)) < 1e-15);
    const SpectralField Dhat = forward_transform(LatticeFunction::nearest_neighbour(3), g).to_dense();
    std::vector<double> k(3);
    for (std::size_t i = 0; i < Dhat.size(); ++i) {
      Dhat.node_of(i, k);
      const double expected = (std::cos(k[0]) + std::cos(k[1]) + std::cos(k[2])) / 3.0;
      CHECK(std::abs(Dhat.values()[i] - expected) < 1e-14);
    }
  }
  // |k| = 0.5 along an axis is not a grid node, so evaluate the finite sum directly
  const LatticeFunction A = critical_srw(3);
  const double kk = 0.5;
  const double Ahat = 1.0 - (std::cos(kk) + 2.0) / 3.0;
  double direct = 0;
  A.for_each([&](std::span<const int> x, double, double v) {
    for_each_orbit_point(x, [&](std::span<const int> p) { direct += v * std::cos(kk * p[0]); });
  });
  CHECK(direct == doctest::Approx(Ahat).epsilon(1e-14));
  CHECK(direct >= 2.0 / (pi * pi * 3.0) * 0.25);
}

TEST_CASE("symmetric engine, FFT and direct paths agree") {
  for (int d = 1; d <= 4; ++d)
    for (bool shifted : {true, false}) {
      const int R = d <= 2 ? 5 : 3;
      const TorusGrid g(d, 12, shifted);
      const LatticeFunction f = random_orbits(d, R, 40 + d);
      const SpectralField sym = forward_transform(f, g);
      const SpectralField fft = forward_transform(f, g, TransformPath::fft);
      const SpectralField dir = forward_transform(f.to_box(), g, TransformPath::direct);
      CHECK(max_diff(sym, fft) < 1e-12);
      CHECK(max_diff(dir, fft) < 1e-12);
      CHECK(sym.max_imag() < 1e-12);
    }
}

TEST_CASE("round trip") {
  for (int d = 1; d <= 4; ++d)
    for (bool shifted : {true, false}) {
      const int R = 3;
      const TorusGrid g(d, 2 * R + 2, shifted);
      const LatticeFunction f = random_orbits(d, R, 70 + d);
      const LatticeFunction back = inverse_on_box(forward_transform(f, g), R, false);
      CHECK(back.layout() == Layout::orbits);
      CHECK(max_diff(back, f) < 1e-13);
      const LatticeFunction fb = random_box(d, R, 80 + d);
      const LatticeFunction back_b = inverse_on_box(forward_transform(fb, g), R, false);
      CHECK(max_diff(back_b, fb) < 1e-13);
    }
  const TorusGrid g(3, 16, true);
  const LatticeFunction delta = inverse_on_box(forward_transform(LatticeFunction::delta(3), g), 4, false);
  CHECK(max_diff(delta, LatticeFunction::delta(3)) < 1e-13);
}

TEST_CASE("Parseval") {
  for (int d = 1; d <= 3; ++d) {
    const int R = 3;
    const TorusGrid g(d, 2 * R + 2, true);
    const LatticeFunction f = random_orbits(d, R, 90 + d);
    const double lattice = moment(LatticeFunction::from_function(d, R, Layout::orbits,
                                                                 [&](std::span<const int> x) {
                                                                   const double v = f(x);
                                                                   return v * v;
                                                                 }),
                                  0.0);
    const double grid2 = std::pow(lp_norm(forward_transform(f, g), 2.0), 2.0);
    CHECK(std::abs(lattice - grid2) <= 1e-12 * lattice);
    const double grid2_dense = std::pow(lp_norm(forward_transform(f, g, TransformPath::fft), 2.0), 2.0);
    CHECK(std::abs(lattice - grid2_dense) <= 1e-12 * lattice);
  }
}

TEST_CASE("spectral derivative") {
  SUBCASE("alpha = 0 is the forward transform") {
    const TorusGrid g(2, 10, true);
    const LatticeFunction f = random_box(2, 3, 1);
    CHECK(max_diff(spectral_derivative(f, MultiIndex::zero(2), g), forward_transform(f, g)) < 1e-12);
  }
  SUBCASE("d = 1 nearest neighbour gives -sin k") {
    const TorusGrid g(1, 16, true);
    const SpectralField s = spectral_derivative(LatticeFunction::nearest_neighbour(1, Layout::box),
                                                MultiIndex{{1}}, g);
    for (int i = 0; i < 16; ++i) CHECK(std::abs(s.values()[i] - cplx(-std::sin(g.node(i)))) < 1e-15);
  }
  SUBCASE("zero function gives the zero field") {
    const TorusGrid g(3, 8, true);
    const SpectralField s = spectral_derivative(LatticeFunction::zeros(3, 2, Layout::orbits), MultiIndex{{2, 1, 0}}, g);
    CHECK(s.max_abs() == 0.0);
  }
  SUBCASE("matches monomial weighting through the FFT path") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 6; ++trial) {
      const int d = 1 + trial % 3;
      MultiIndex alpha = MultiIndex::zero(d);
      for (int& a : alpha.orders) a = static_cast<int>(rng() % 4);
      const LatticeFunction f = random_box(d, 3, 200 + trial);
      const TorusGrid g(d, 8, trial % 2 == 0);
      const SpectralField direct = spectral_derivative(f, alpha, g);
      const SpectralField fft = spectral_derivative(f, alpha, g, TransformPath::fft);
      CHECK(max_diff(direct, fft) < 1e-13 * std::max(1.0, fft.max_abs()));
    }
  }
  SUBCASE("symmetric input with lead axes") {
    for (int d = 2; d <= 4; ++d) {
      const LatticeFunction f = random_orbits(d, 3, 300 + d);
      const TorusGrid g(d, 8, true);
      MultiIndex alpha = MultiIndex::zero(d);
      alpha.orders[0] = 3;
      if (d > 2) alpha.orders[1] = 1;
      const SpectralField lead = spectral_derivative(f, alpha, g);
      CHECK(lead.layout() == FieldLayout::reduced);
      const SpectralField ref = spectral_derivative(f.to_box(), alpha, g);
      CHECK(max_diff(lead, ref) < 1e-12 * std::max(1.0, ref.max_abs()));
      const SpectralField forced = spectral_derivative(f, MultiIndex::zero(d), g, TransformPath::automatic, 1);
      CHECK(forced.lead_axes() == 1);
      CHECK(max_diff(forced, forward_transform(f, g)) < 1e-12);
    }
  }
}

TEST_CASE("lp norms") {
  const TorusGrid g(2, 16, true);
  SpectralField one = SpectralField::dense(g);
  for (auto& v : one.values()) v = 1.0;
  for (double p : {1.0, 2.0, 3.0, double(INFINITY)}) CHECK(lp_norm(one, p) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(lp_norm(one, 0.5), PreconditionError);

  const TorusGrid g1(1, 64, true);
  const SpectralField cosk = forward_transform(LatticeFunction::nearest_neighbour(1), g1);
  CHECK(std::abs(lp_norm(cosk, 2.0) - 1.0 / std::sqrt(2.0)) < 1e-10);

  // 1/|k|^2 in d = 3: refinement increases the integral toward its limit
  auto inv_k2 = [](int M) {
    const TorusGrid g3(3, M, true);
    SpectralField s = SpectralField::reduced(g3, 0);
    std::vector<double> k(3);
    for (std::size_t i = 0; i < s.size(); ++i) {
      s.node_of(i, k);
      s.values()[i] = 1.0 / (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
    }
    return lp_norm(s, 1.0);
  };
  const double a = inv_k2(64), b = inv_k2(128);
  CHECK(b > a);
  CHECK((b - a) / b < 0.03);
}

TEST_CASE("infrared check") {
  const double bound = 2.0 / (3.0 * pi * pi);
  const InfraredReport r = infrared_check(critical_srw(3), TorusGrid(3, 32, true));
  CHECK(r.K2_est >= bound);
  CHECK(r.f_hat_zero == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(r.holds());
  for (int d = 1; d <= 5; ++d) {
    const InfraredReport rd = infrared_check(critical_srw(d), TorusGrid(d, d <= 3 ? 32 : 16, true));
    CHECK(rd.K2_est >= 2.0 / (pi * pi * d));
  }
  const InfraredReport bad = infrared_check(-1.0 * LatticeFunction::delta(3), TorusGrid(3, 8, true));
  CHECK(bad.K2_est <= 0.0);
  CHECK(bad.f_hat_zero == -1.0);
  CHECK_FALSE(bad.holds());
}

TEST_CASE("inverse of reciprocal") {
  SUBCASE("subcritical inverse is exact on the torus") {
    const int M = 64;
    const TorusGrid g(3, M, true);
    const LatticeFunction A = LatticeFunction::delta(3) - 0.5 * LatticeFunction::nearest_neighbour(3);
    const LatticeFunction C = inverse_on_box(forward_transform(A, g), M / 2 - 1, true);
    // periodic convolution at interior points equals the plain convolution
    const LatticeFunction AC = convolve(A, C);
    double err = 0;
    std::vector<int> x(3);
    AC.for_each([&](std::span<const int> p, double, double v) {
      int m = 0;
      for (int c : p) m = std::max(m, std::abs(c));
      if (m > M / 2 - 2) return;
      err = std::max(err, std::abs(v - (m == 0 ? 1.0 : 0.0)));
    });
    CHECK(err < 1e-12);
  }
  SUBCASE("critical inverse converges under grid refinement") {
    const LatticeFunction A = critical_srw(3);
    const LatticeFunction a = inverse_on_box(forward_transform(A, TorusGrid(3, 512, true)), 8, true);
    const LatticeFunction b = inverse_on_box(forward_transform(A, TorusGrid(3, 1024, true)), 8, true);
    const double va = a.at({8, 0, 0}), vb = b.at({8, 0, 0});
    CHECK(std::abs(va - vb) / vb < 0.02);
  }
  SUBCASE("poles are rejected") {
    const TorusGrid g(3, 8, false);
    CHECK_THROWS_AS(inverse_on_box(forward_transform(critical_srw(3), g), 2, true), PreconditionError);
  }
}

TEST_CASE("derivative norms bound decay") {
  // |x|^n |h(x)| <= d^{n/2} max_j || (x_j^n h)^ ||_1 holds exactly on an unaliased grid
  const int d = 3, R = 5, n = 2;
  const LatticeFunction h = LatticeFunction::from_function(d, R, Layout::orbits, [](std::span<const int> x) {
    double r2 = 0;
    for (int c : x) r2 += c * c;
    return std::pow(std::max(std::sqrt(r2), 1.0), -5.0);
  });
  const TorusGrid g(d, 2 * R + 2, true);
  double bound = 0;
  for (int j = 0; j < d; ++j)
    bound = std::max(bound, lp_norm(spectral_derivative(h.to_box(), MultiIndex::axis(d, j, n), g), 1.0));
  const double c = std::pow(d, n / 2.0);
  h.for_each([&](std::span<const int> x, double, double v) {
    double r2 = 0;
    for (int cc : x) r2 += cc * cc;
    CHECK(std::abs(v) * std::pow(r2, n / 2.0) <= c * bound * (1 + 1e-12));
  });
}
