#pragma once

#include <boost/rational.hpp>
#include <string>
#include <vector>

namespace latdeconv {

using Rational = boost::rational<long long>;

/// Parses "2", "-0.25", "7/2" exactly.
Rational parse_rational(const std::string& text);
std::string to_string(const Rational& r);
double to_double(const Rational& r);

struct ExponentBudget {
  int d = 0;
  Rational rho;
  Rational s_sup;  ///< supremum of admissible error powers s
  int s0 = 0;      ///< largest integer s below s_sup
  int n_d = 0;     ///< d - 2 + s0, the number of integer derivatives used
  Rational n_d_bound;  ///< (d - 2 + rho ^ 2) ^ (d/2 + 2 + rho); n_d stays strictly below it
  bool in_range = true;  ///< rho > (d-8)/2 v 0
};

/// (d - 8)/2 v 0, the lower limit of the rho range.
Rational rho_lower_limit(int d);

/// Admissible error exponents for a kernel with tail exponent rho. Out-of-range
/// rho throws PreconditionError unless exploratory is set, in which case the
/// budget comes back with in_range = false.
ExponentBudget admissible_s(int d, const Rational& rho, bool exploratory = false);

/// One term of the product/quotient expansion of the weak derivative of f^:
/// the orders |delta_n| of the A-factors, |alpha_2| on the E-factor and
/// |gamma_m| on the F-factors.
struct DerivativeSplit {
  std::vector<int> delta_orders;
  int alpha2 = 0;
  std::vector<int> gamma_orders;
  int total_order() const;
};

struct SplitBudget {
  DerivativeSplit split;
  double inv_r_lower = 0.0;  ///< (sum|delta| + 2 - sigma + |alpha_2| + eta + sum|gamma|) / d
  bool r1_feasible = false;  ///< inv_r_lower < 1
  std::vector<double> q1_thresholds;  ///< |gamma|/d per A- and F-factor, delta first
  double q2_threshold = 0.0;          ///< (2 - sigma + |alpha_2| + eta)/d
  bool orders_admissible = true;      ///< every factor order below the n_d bound
};

struct HolderBudget {
  int d = 0;
  double rho = 0.0, sigma = 0.0, eta = 0.0;
  std::vector<SplitBudget> splits;
  bool all_feasible() const;
};

HolderBudget holder_budget(int d, double rho, double sigma, double eta,
                           const std::vector<DerivativeSplit>& splits);

/// Every split of an order-n derivative into (alpha_1, alpha_2, alpha_3) with
/// alpha_1 and alpha_3 partitioned into positive parts; only orders matter.
std::vector<DerivativeSplit> all_splits(int order);

/// What a decay bound |h(x)| <= K <x>^{-b} implies for h and its transform.
struct DecayClass {
  bool summable = false;       ///< b > d: h in l^1 and h^ bounded
  double lp_min = 0.0;         ///< h in l^p for every p > lp_min
  double hat_lq_max = 0.0;     ///< h^ in L^q for 1 <= q < hat_lq_max (infinity when b > d, 0 if unknown)
};
DecayClass classify_decay(int d, double b);

/// Integrability of a power singularity |k|^{-p} on T^d: in L^q iff p q < d.
bool power_singularity_in_lq(double p, double q, int d);
/// Lebesgue exponents q for which |k|^{-p} is in L^q: q < d/p (infinite when p <= 0).
double lq_limit(double p, int d);

}  // namespace latdeconv
