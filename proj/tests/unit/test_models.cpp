#include <cmath>

#include "doctest.h"
#include "latdeconv/common.hpp"
#include "latdeconv/models.hpp"

using namespace latdeconv;

namespace {

struct QuietWarnings {
  QuietWarnings() { set_warning_handler(nullptr); }
};
const QuietWarnings quiet;

ModelSpec perturbed(int d, double rho, double eps, int tail) {
  ModelSpec s;
  s.kind = ModelKind::perturbed;
  s.d = d;
  s.rho = rho;
  s.epsilon = eps;
  s.tail_radius = tail;
  return s;
}

}  // namespace

TEST_CASE("simple random walk kernel") {
  const LatticeFunction F = srw_kernel(3, 1.0);
  CHECK(F.at({0, 0, 0}) == 1.0);
  CHECK(F.at({1, 0, 0}) == doctest::Approx(-1.0 / 6.0).epsilon(1e-15));
  CHECK(F.at({0, 0, -1}) == doctest::Approx(-1.0 / 6.0).epsilon(1e-15));
  CHECK(F.at({1, 1, 0}) == 0.0);
  for (double mu0 : {0.25, 0.5, 1.0}) CHECK(moment(srw_kernel(4, mu0), 0.0) == doctest::Approx(1.0 - mu0).epsilon(1e-15));
  CHECK(check_symmetry(F).symmetric);
  for (double rho : {0.1, 1.0, 5.0}) CHECK(assumption_report(F, rho).pass);
  CHECK_THROWS_AS(srw_kernel(3, 0.0), PreconditionError);
}

TEST_CASE("perturbed kernel construction") {
  SUBCASE("epsilon = 0 is the critical walk") {
    const LatticeFunction F = perturbed_kernel(perturbed(4, 1.0, 0.0, 6)).F;
    const LatticeFunction S = srw_kernel(4, 1.0);
    CHECK((F - S).sup_norm() == 0.0);
  }
  SUBCASE("d = 5, rho = 2, eps = 0.05") {
    const double eps = 0.05;
    const PerturbedKernel pk = perturbed_kernel(perturbed(5, 2.0, eps, 12));
    CHECK(pk.epsilon == eps);
    CHECK(std::abs(moment(pk.F, 0.0)) < 1e-15);
    // independent second moment: loop over every box point, no orbit bookkeeping
    double sum = 0.0;
    const int T = 12;
    std::vector<int> x(5, -T);
    for (;;) {
      long long r2 = 0;
      for (int c : x) r2 += c * c;
      if (r2 >= 4 && r2 <= T * T) sum += r2 * std::pow(static_cast<double>(r2), -4.5);
      int j = 4;
      while (j >= 0 && ++x[j] > T) x[j--] = -T;
      if (j < 0) break;
    }
    const double K2 = 1.0 - eps * sum;
    CHECK(-moment(pk.F, 2.0) == doctest::Approx(K2).epsilon(1e-12));
    CHECK(K2 > 0.0);
    // positive values away from the origin
    CHECK(pk.F.at({2, 0, 0, 0, 0}) > 0.0);
  }
  SUBCASE("d = 3, rho = 0.5, eps = 0.02 passes with the declared envelope") {
    const PerturbedKernel pk = perturbed_kernel(perturbed(3, 0.5, 0.02, 16));
    const AssumptionReport rep = assumption_report(pk.F, 0.5);
    CHECK(rep.pass);
    CHECK(rep.envelope.b >= 5.5 - 1e-9);
    CHECK(rep.envelope.holds());
    CHECK(rep.infrared.K2_est > 0.0);
  }
  SUBCASE("seeded signs are deterministic and symmetric") {
    ModelSpec s = perturbed(4, 1.5, 0.05, 8);
    s.seed = 7;
    const LatticeFunction a = perturbed_kernel(s).F, b = perturbed_kernel(s).F;
    REQUIRE(a.size() == b.size());
    bool same = true;
    for (std::size_t i = 0; i < a.size(); ++i) same = same && a.values()[i] == b.values()[i];
    CHECK(same);
    CHECK(check_symmetry(a.to_box()).symmetric);
    s.seed = 8;
    CHECK((perturbed_kernel(s).F - a).sup_norm() > 0.0);
    int neg = 0, pos = 0;
    a.for_each([&](std::span<const int> x, double, double v) {
      long long r2 = 0;
      for (int c : x) r2 += c * c;
      if (r2 < 4) return;
      (v > 0 ? pos : neg) += v != 0.0;
    });
    CHECK(pos > 0);
    CHECK(neg > 0);
  }
  SUBCASE("large epsilon is halved until the infrared bound holds") {
    const PerturbedKernel pk = perturbed_kernel(perturbed(3, 1.0, 50.0, 6));
    CHECK(pk.halvings > 0);
    CHECK(assumption_report(pk.F, 1.0).infrared.K2_est > 0.0);
  }
  CHECK_THROWS_AS(perturbed_kernel(perturbed(12, 0.1, 0.05, 4)), PreconditionError);
}

TEST_CASE("assumption failures") {
  const LatticeFunction neg = -1.0 * LatticeFunction::delta(3);
  const AssumptionReport r = assumption_report(neg, 1.0);
  CHECK_FALSE(r.pass);
  CHECK(r.F_hat_zero == -1.0);
  CHECK(r.infrared.K2_est <= 0.0);

  ModelSpec s = perturbed(3, 1.0, 50.0, 6);
  s.exploratory = true;
  const AssumptionReport big = assumption_report(perturbed_kernel(s).F, 1.0);
  CHECK_FALSE(big.pass);
  CHECK(big.infrared.K2_est <= 0.0);
  CHECK(big.infrared.argmin_node.size() == 3);

  LatticeFunction asym = LatticeFunction::zeros(2, 2);
  asym.set({1, 0}, 1.0);
  const AssumptionReport a = assumption_report(asym, 1.0);
  CHECK_FALSE(a.symmetric);
  CHECK_FALSE(a.pass);

  CHECK_FALSE(assumption_report(srw_kernel(12, 1.0), 1.0).rho_range_ok);
}

TEST_CASE("model table") {
  const auto rows = model_table();
  REQUIRE(rows.size() == 5);
  CHECK(rows[0].rho_at_d_min == Rational(2));
  CHECK(rows[0].budget.s_sup == Rational(2));
  CHECK(rows[0].budget.n_d == 4);
  CHECK(rows[3].d_min == 11);
  CHECK(rows[3].rho_at_d_min == Rational(5));
  CHECK(rows[4].d_min == 27);
  CHECK(rows[4].rho_at_d_min == Rational(17));
  CHECK(rows[4].budget.s_sup == Rational(2));
  for (const auto& r : rows) {
    CHECK(r.budget.in_range);
    // the formula stays in range for every larger dimension too
    for (int d = r.d_min; d < r.d_min + 20; ++d)
      CHECK(Rational(r.rho_coeff * d + r.rho_offset) > rho_lower_limit(d));
  }
}

TEST_CASE("ModelSpec JSON round trip") {
  ModelSpec s = perturbed(7, 2.5, 0.03, 5);
  s.seed = 123456789012345ULL;
  const ModelSpec t = model_spec_from_json(model_spec_to_json(s));
  CHECK(t.kind == s.kind);
  CHECK(t.d == s.d);
  CHECK(t.rho == s.rho);
  CHECK(t.epsilon == s.epsilon);
  CHECK(t.tail_radius == s.tail_radius);
  REQUIRE(t.seed.has_value());
  CHECK(*t.seed == *s.seed);
  CHECK(model_spec_to_json(t) == model_spec_to_json(s));

  const ModelSpec srw = model_spec_from_json(R"({"model": "srw", "d": 4, "seed": null, "R": 12})");
  CHECK(srw.kind == ModelKind::srw);
  CHECK(srw.d == 4);
  CHECK_FALSE(srw.seed.has_value());

  CHECK_THROWS_AS(model_spec_from_json("{not json"), PreconditionError);
  CHECK_THROWS_AS(model_spec_from_json(R"({"model": "ising"})"), PreconditionError);
  CHECK_THROWS_AS(model_spec_from_json(R"({"d": "five"})"), PreconditionError);
}
