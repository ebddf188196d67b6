#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "doctest.h"
#include "latdeconv/common.hpp"
#include "latdeconv/lattice.hpp"
#include "latdeconv/orbits.hpp"

using namespace latdeconv;

namespace {

LatticeFunction random_box(int d, int R, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return LatticeFunction::from_function(d, R, Layout::box, [&](std::span<const int>) { return u(rng); });
}

LatticeFunction random_orbits(int d, int R, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return LatticeFunction::from_function(d, R, Layout::orbits,
                                        [&](std::span<const int>) { return u(rng); });
}

double floor_norm(std::span<const int> x) {
  double s = 0;
  for (int c : x) s += double(c) * c;
  return std::max(std::sqrt(s), 1.0);
}

}  // namespace

TEST_CASE("sorted tuples: rank order matches iteration and unrank") {
  for (int m = 1; m <= 4; ++m) {
    SortedTuples t(6, m);
    std::vector<int> a(m), b(m);
    t.first(a);
    std::size_t count = 0;
    do {
      CHECK(t.rank(a) == count);
      t.unrank(count, b);
      CHECK(a == b);
      CHECK(std::is_sorted(a.begin(), a.end()));
      ++count;
    } while (t.next(a));
    CHECK(count == t.size());
  }
}

TEST_CASE("orbit sizes partition the box") {
  for (int d = 1; d <= 4; ++d)
    for (int R = 0; R <= 3; ++R) {
      SortedTuples t(R + 1, d);
      std::vector<int> a(d);
      t.first(a);
      std::uint64_t total = 0;
      do {
        std::uint64_t n = 0;
        for_each_orbit_point(a, [&](std::span<const int>) { ++n; });
        CHECK(n == orbit_size(a));
        total += n;
      } while (t.next(a));
      CHECK(total == static_cast<std::uint64_t>(std::pow(2 * R + 1, d)));
    }
}

TEST_CASE("check_symmetry") {
  CHECK(check_symmetry(LatticeFunction::delta(3, Layout::box)).symmetric);
  CHECK(check_symmetry(LatticeFunction::nearest_neighbour(2, Layout::box)).symmetric);

  LatticeFunction f = LatticeFunction::zeros(2, 1, Layout::box);
  f.set({1, 0}, 1.0);
  const SymmetryReport rep = check_symmetry(f);
  CHECK_FALSE(rep.symmetric);
  REQUIRE(rep.witness_point);
  CHECK(std::abs(rep.witness_point->coords[0]) == 1);
  CHECK(rep.witness_point->coords[1] == 0);
  CHECK(rep.witness_element->describe() == "reflection in coordinate 1");

  LatticeFunction g = LatticeFunction::zeros(2, 1, Layout::box);
  g.set({1, 0}, 1.0);
  g.set({-1, 0}, 1.0);
  const SymmetryReport rep2 = check_symmetry(g);
  CHECK_FALSE(rep2.symmetric);
  CHECK(rep2.witness_element->describe() == "transposition of coordinates 1 and 2");
}

TEST_CASE("symmetrization is idempotent and lands in the symmetric class") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const LatticeFunction f = random_box(3, 2, seed);
    const LatticeFunction s = symmetrize(f);
    CHECK(check_symmetry(s.to_box()).symmetric);
    const LatticeFunction s2 = symmetrize(s.to_box());
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(s2.values()[i] == doctest::Approx(s.values()[i]).epsilon(1e-15));
    // group average preserves every radial moment
    CHECK(moment(s, 2.0) == doctest::Approx(moment(f, 2.0)).epsilon(1e-12));
  }
}

TEST_CASE("moment examples") {
  CHECK(moment(LatticeFunction::delta(3), 0.0) == 1.0);
  CHECK(moment(LatticeFunction::nearest_neighbour(2), 2.0) == doctest::Approx(1.0).epsilon(1e-15));
  const double mu = 0.5;
  const LatticeFunction A = LatticeFunction::delta(3) - mu * LatticeFunction::nearest_neighbour(3);
  CHECK(moment(A, 2.0) == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(moment(A.to_box(), 2.0) == doctest::Approx(-0.5).epsilon(1e-15));
}

TEST_CASE("moment linearity") {
  for (std::uint64_t seed = 10; seed < 15; ++seed) {
    const LatticeFunction f = random_orbits(4, 4, seed), g = random_orbits(4, 4, seed + 100);
    const double a = 0.37, b = -1.9;
    for (double p : {0.0, 1.0, 2.0, 3.5}) {
      const double lhs = moment(a * f + b * g, p);
      const double rhs = a * moment(f, p) + b * moment(g, p);
      const double scale = std::abs(a) * moment(f, p, true) + std::abs(b) * moment(g, p, true);
      CHECK(std::abs(lhs - rhs) <= 1e-12 * scale);
    }
  }
}

TEST_CASE("convolution algebra") {
  const LatticeFunction f = random_box(2, 3, 7);
  const LatticeFunction df = convolve(LatticeFunction::delta(2, Layout::box), f);
  for (std::size_t i = 0; i < f.size(); ++i) {
    std::vector<int> x(2);
    f.point_of(i, x);
    CHECK(df(x) == f.values()[i]);
  }
  const LatticeFunction D1 = LatticeFunction::nearest_neighbour(1, Layout::box);
  CHECK(convolve(D1, D1).at({0}) == 0.5);

  const LatticeFunction g = random_box(2, 2, 8);
  const LatticeFunction fg = convolve(f, g), gf = convolve(g, f);
  double diff = 0;
  for (std::size_t i = 0; i < fg.size(); ++i) diff = std::max(diff, std::abs(fg.values()[i] - gf.values()[i]));
  CHECK(diff <= 1e-14);
}

TEST_CASE("orbit and box convolution agree") {
  const LatticeFunction f = random_orbits(3, 3, 21), g = random_orbits(3, 2, 22);
  const LatticeFunction a = convolve(f, g);
  const LatticeFunction b = convolve(f.to_box(), g.to_box());
  CHECK(a.layout() == Layout::orbits);
  std::vector<int> x(3);
  double diff = 0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    b.point_of(i, x);
    diff = std::max(diff, std::abs(a(x) - b.values()[i]));
  }
  CHECK(diff <= 1e-13);
}

TEST_CASE("apply_monomial examples") {
  const LatticeFunction f = random_box(2, 2, 3);
  const LatticeFunction f0 = apply_monomial(f, MultiIndex::zero(2));
  CHECK(std::equal(f0.values().begin(), f0.values().end(), f.values().begin()));
  const LatticeFunction dz = apply_monomial(LatticeFunction::delta(3), MultiIndex{{1, 0, 2}});
  CHECK(dz.sup_norm() == 0.0);
  const LatticeFunction D = apply_monomial(LatticeFunction::nearest_neighbour(2), MultiIndex{{2, 0}});
  CHECK(D.at({1, 0}) == 0.25);
  CHECK(D.at({-1, 0}) == 0.25);
  CHECK(D.at({0, 1}) == 0.0);
  CHECK(D.at({0, -1}) == 0.0);
}

TEST_CASE("fit_envelope") {
  SUBCASE("exact power law") {
    const LatticeFunction f = LatticeFunction::from_function(
        3, 16, Layout::orbits, [](std::span<const int> x) { return std::pow(floor_norm(x), -7.0); });
    const DecayEnvelope env = fit_envelope(f, 2.0, 16.0);
    CHECK(env.b == doctest::Approx(7.0).epsilon(0.01 / 7));
    CHECK(env.max_violation <= 0.0);
    CHECK(env.holds());
  }
  SUBCASE("delta gives the zero-window sentinel") {
    const LatticeFunction d = LatticeFunction::delta(3).resized(4);
    const DecayEnvelope env = fit_envelope(d, 1.0, 4.0);
    CHECK(env.zero_window);
    CHECK(std::isinf(env.b));
    CHECK(env.K == 0.0);
  }
  SUBCASE("perturbed power law") {
    const LatticeFunction f = LatticeFunction::from_function(3, 16, Layout::box, [](std::span<const int> x) {
      return std::pow(floor_norm(x), -7.0) * (1.0 + 0.1 * ((x[0] % 2) ? -1.0 : 1.0));
    });
    const DecayEnvelope env = fit_envelope(f, 2.0, 16.0);
    CHECK(env.b >= 6.9);
    CHECK(env.b <= 7.1);
    CHECK(env.holds());
    // the exact envelope constant is 1.1; the fit may trade a little exponent for amplitude
    CHECK(env.K <= 1.1 * std::pow(16.0 * std::sqrt(3.0), std::abs(env.b - 7.0)) * (1 + 1e-9));
  }
  SUBCASE("insufficient data") {
    LatticeFunction f = LatticeFunction::zeros(2, 4, Layout::orbits);
    f.set({2, 0}, 1.0);
    CHECK_THROWS_AS(fit_envelope(f, 1.0, 4.0), PreconditionError);
  }
}

TEST_CASE("serialization round trip") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "latdeconv_io_test";
  fs::create_directories(dir);
  for (bool inline_b64 : {true, false})
    for (const LatticeFunction& f : {random_box(2, 3, 5), random_orbits(3, 3, 6)}) {
      const std::string path = (dir / (inline_b64 ? "f_inline.json" : "f_sidecar.json")).string();
      write_lattice_function(f, path, inline_b64);
      const LatticeFunction g = read_lattice_function(path);
      CHECK(g.dim() == f.dim());
      CHECK(g.radius() == f.radius());
      const LatticeFunction fb = f.to_box();
      REQUIRE(g.size() == fb.size());
      CHECK(std::equal(g.values().begin(), g.values().end(), fb.values().begin()));
    }
  std::ostringstream csv;
  write_csv(LatticeFunction::nearest_neighbour(2), csv);
  CHECK(csv.str().rfind("x1,x2,value\n", 0) == 0);
  fs::remove_all(dir);
}
