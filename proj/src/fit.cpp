#include "latdeconv/fit.hpp"

#include <cmath>

#include "latdeconv/common.hpp"
#include "latdeconv/parallel.hpp"

namespace latdeconv {

LinearFit linear_fit(std::span<const double> x, std::span<const double> y,
                     std::span<const double> w) {
  const std::size_t n = x.size();
  if (y.size() != n || (!w.empty() && w.size() != n))
    throw PreconditionError("linear_fit: mismatched input lengths");
  if (n < 2) throw PreconditionError("linear_fit: need at least two points");
  auto weight = [&](std::size_t i) { return w.empty() ? 1.0 : w[i]; };

  KahanSum sw, sx, sy;
  for (std::size_t i = 0; i < n; ++i) {
    sw += weight(i);
    sx += weight(i) * x[i];
    sy += weight(i) * y[i];
  }
  const double W = sw.value();
  const double mx = sx.value() / W, my = sy.value() / W;
  KahanSum sxx, sxy, syy;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += weight(i) * dx * dx;
    sxy += weight(i) * dx * dy;
    syy += weight(i) * dy * dy;
  }
  if (sxx.value() <= 0.0) throw PreconditionError("linear_fit: abscissae are all equal");

  LinearFit fit;
  fit.points = static_cast<int>(n);
  fit.slope = sxy.value() / sxx.value();
  fit.intercept = my - fit.slope * mx;
  KahanSum ssr;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    ssr += weight(i) * r * r;
  }
  fit.r_squared = syy.value() > 0.0 ? 1.0 - ssr.value() / syy.value() : 1.0;
  if (n > 2) {
    // effective sample size for weighted data
    KahanSum sw2;
    for (std::size_t i = 0; i < n; ++i) sw2 += weight(i) * weight(i);
    const double neff = W * W / sw2.value();
    const double sigma2 = ssr.value() / W * neff / std::max(neff - 2.0, 1.0);
    fit.slope_stderr = std::sqrt(std::max(sigma2, 0.0) / sxx.value());
  }
  return fit;
}

double fixed_slope_intercept(std::span<const double> x, std::span<const double> y, double slope,
                             std::span<const double> w) {
  if (x.empty() || x.size() != y.size()) throw PreconditionError("fixed_slope_intercept: bad input");
  KahanSum sw, s;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    sw += wi;
    s += wi * (y[i] - slope * x[i]);
  }
  return s.value() / sw.value();
}

}  // namespace latdeconv
