#include "latdeconv/budget.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "latdeconv/common.hpp"

namespace latdeconv {

Rational parse_rational(const std::string& text) {
  auto fail = [&]() -> Rational { throw PreconditionError("not a rational number: '" + text + "'"); };
  if (text.empty()) return fail();
  const auto slash = text.find('/');
  if (slash != std::string::npos) {
    try {
      std::size_t pn = 0, pd = 0;
      const std::string ns = text.substr(0, slash), ds = text.substr(slash + 1);
      const long long n = std::stoll(ns, &pn), dd = std::stoll(ds, &pd);
      if (pn != ns.size() || pd != ds.size() || dd == 0) return fail();
      return Rational(n, dd);
    } catch (const std::logic_error&) {
      return fail();
    }
  }
  std::size_t i = 0;
  bool neg = false;
  if (text[i] == '-' || text[i] == '+') neg = text[i++] == '-';
  long long num = 0, den = 1;
  bool digits = false, point = false;
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '.' && !point) {
      point = true;
      continue;
    }
    if (c < '0' || c > '9') return fail();
    if (num > (std::numeric_limits<long long>::max() - 9) / 10 || den > std::numeric_limits<long long>::max() / 10)
      return fail();
    num = num * 10 + (c - '0');
    if (point) den *= 10;
    digits = true;
  }
  if (!digits) return fail();
  return Rational(neg ? -num : num, den);
}

std::string to_string(const Rational& r) {
  std::ostringstream os;
  os << r.numerator();
  if (r.denominator() != 1) os << '/' << r.denominator();
  return os.str();
}

double to_double(const Rational& r) {
  return boost::rational_cast<double>(r);
}

Rational rho_lower_limit(int d) {
  return std::max(Rational(d - 8, 2), Rational(0));
}

ExponentBudget admissible_s(int d, const Rational& rho, bool exploratory) {
  if (d <= 2) throw PreconditionError("d > 2 required");
  ExponentBudget b;
  b.d = d;
  b.rho = rho;
  const Rational floor_rho = rho_lower_limit(d);
  b.in_range = rho > floor_rho;
  if (!b.in_range && !exploratory)
    throw PreconditionError(
        "rho = " + to_string(rho) + " is not above (d-8)/2 v 0 = " + to_string(floor_rho) +
        " for d = " + std::to_string(d) +
        "; below this limit the error bound is not established (the limit comes from the "
        "Hoelder budget of the proof and is believed removable), rerun in exploratory mode");
  const Rational two(2);
  const Rational excess = d > 8 ? rho - Rational(d - 8, 2) : rho;
  b.s_sup = std::min(excess, two);
  b.s0 = rho > Rational(1) + floor_rho ? 1 : 0;
  b.n_d = d - 2 + b.s0;
  b.n_d_bound = std::min(Rational(d - 2) + std::min(rho, two), Rational(d, 2) + two + rho);
  if (b.in_range && !(Rational(b.n_d) < b.n_d_bound))
    throw InvariantError("n_d = " + std::to_string(b.n_d) + " is not below its bound " + to_string(b.n_d_bound));
  return b;
}

int DerivativeSplit::total_order() const {
  int s = alpha2;
  for (int o : delta_orders) s += o;
  for (int o : gamma_orders) s += o;
  return s;
}

bool HolderBudget::all_feasible() const {
  return std::all_of(splits.begin(), splits.end(), [](const SplitBudget& s) { return s.r1_feasible; });
}

HolderBudget holder_budget(int d, double rho, double sigma, double eta,
                           const std::vector<DerivativeSplit>& splits) {
  if (d <= 2) throw PreconditionError("d > 2 required");
  if (!(sigma > 0.0 && sigma <= 2.0 && sigma < rho))
    throw PreconditionError("sigma must satisfy 0 < sigma <= 2 and sigma < rho");
  if (!(eta >= 0.0 && eta <= 1.0)) throw PreconditionError("eta must lie in [0, 1]");
  HolderBudget hb{d, rho, sigma, eta, {}};
  const double order_bound = std::min(d - 2 + std::min(rho, 2.0), 0.5 * d + 2 + rho);
  for (const DerivativeSplit& sp : splits) {
    if (sp.alpha2 < 0) throw PreconditionError("negative derivative order");
    SplitBudget sb;
    sb.split = sp;
    int sum = 0;
    for (int o : sp.delta_orders) {
      if (o <= 0) throw PreconditionError("factor orders must be positive");
      sum += o;
      sb.q1_thresholds.push_back(static_cast<double>(o) / d);
      sb.orders_admissible = sb.orders_admissible && o < order_bound;
    }
    for (int o : sp.gamma_orders) {
      if (o <= 0) throw PreconditionError("factor orders must be positive");
      sum += o;
      sb.q1_thresholds.push_back(static_cast<double>(o) / d);
      sb.orders_admissible = sb.orders_admissible && o < order_bound;
    }
    sb.orders_admissible = sb.orders_admissible && sp.alpha2 < order_bound;
    sb.q2_threshold = (2.0 - sigma + sp.alpha2 + eta) / d;
    sb.inv_r_lower = (sum + sp.alpha2 + 2.0 - sigma + eta) / d;
    sb.r1_feasible = sb.inv_r_lower < 1.0 && sb.orders_admissible;
    hb.splits.push_back(std::move(sb));
  }
  return hb;
}

std::vector<DerivativeSplit> all_splits(int order) {
  if (order < 0) throw PreconditionError("negative derivative order");
  // integer partitions of n into positive parts, nonincreasing
  std::function<void(int, int, std::vector<int>&, std::vector<std::vector<int>>&)> parts =
      [&](int n, int cap, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
        if (n == 0) {
          out.push_back(cur);
          return;
        }
        for (int p = std::min(n, cap); p >= 1; --p) {
          cur.push_back(p);
          parts(n - p, p, cur, out);
          cur.pop_back();
        }
      };
  std::vector<DerivativeSplit> out;
  for (int a1 = 0; a1 <= order; ++a1)
    for (int a3 = 0; a1 + a3 <= order; ++a3) {
      std::vector<std::vector<int>> p1, p3;
      std::vector<int> cur;
      parts(a1, a1, cur, p1);
      parts(a3, a3, cur, p3);
      for (const auto& dlt : p1)
        for (const auto& gam : p3) out.push_back({dlt, order - a1 - a3, gam});
    }
  return out;
}

DecayClass classify_decay(int d, double b) {
  if (!(b > 0.0)) throw PreconditionError("decay exponent must be positive");
  DecayClass c;
  c.summable = b > d;
  c.lp_min = c.summable ? 1.0 : d / b;
  if (c.summable)
    c.hat_lq_max = std::numeric_limits<double>::infinity();
  else if (b > 0.5 * d)
    c.hat_lq_max = d / (d - b);
  return c;
}

bool power_singularity_in_lq(double p, double q, int d) {
  return p * q < d;
}

double lq_limit(double p, int d) {
  return p <= 0.0 ? std::numeric_limits<double>::infinity() : d / p;
}

}  // namespace latdeconv
