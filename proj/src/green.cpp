#include "latdeconv/green.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "latdeconv/common.hpp"
#include "latdeconv/fit.hpp"
#include "latdeconv/parallel.hpp"

namespace latdeconv {

double a_d(int d) {
  if (d <= 2) throw PreconditionError("a_d needs d > 2");
  return d * std::tgamma((d - 2) / 2.0) / (2.0 * std::pow(std::numbers::pi, d / 2.0));
}

int default_walk_steps(double mu) {
  if (mu >= 1.0) return 400;
  if (mu <= 0.0) return 1;
  return std::max(1, static_cast<int>(std::ceil(std::log(1e-16 * (1.0 - mu)) / std::log(mu))));
}

namespace {

void check_mu(double mu) {
  if (!(mu >= 0.0 && mu <= 1.0)) throw PreconditionError("mu must lie in [0, 1]");
}

}  // namespace

WalkSumBox walk_sum_box(double mu, int d, int radius, int n_max) {
  if (d <= 2) throw PreconditionError("walk sums need d > 2");
  check_mu(mu);
  if (n_max < 0 || radius < 0) throw PreconditionError("walk length and radius must be nonnegative");

  // orbit states with l1 norm <= n_max + 1, indexed in a rank space wide enough for their neighbours
  const int width = n_max + 2;
  const SortedTuples space(width + 1, d);
  require_cells(3.0 * static_cast<double>(space.size()), "walk-sum state");
  // per parity, representatives sorted by l1 so each step works on a prefix
  std::vector<std::vector<std::uint32_t>> by_l1(n_max + 2);
  std::vector<int> a(d);
  space.first(a);
  do {
    int l1 = 0;
    for (int v : a) l1 += v;
    if (l1 <= n_max + 1) by_l1[l1].push_back(static_cast<std::uint32_t>(space.rank(a)));
  } while (space.next(a));
  std::vector<std::uint32_t> parity_list[2];
  std::vector<std::size_t> prefix(n_max + 2);
  for (int l1 = 0; l1 <= n_max + 1; ++l1) {
    auto& list = parity_list[l1 % 2];
    list.insert(list.end(), by_l1[l1].begin(), by_l1[l1].end());
    prefix[l1] = list.size();
  }
  by_l1.clear();

  const double hop = 1.0 / (2.0 * d);
  std::vector<double> cur(space.size(), 0.0), nxt(space.size(), 0.0);
  cur[0] = 1.0;  // D^{*0} = delta

  LatticeFunction partial = LatticeFunction::zeros(d, radius, Layout::orbits);
  LatticeFunction tail = LatticeFunction::zeros(d, radius, Layout::orbits);
  const std::size_t out_n = partial.size();
  std::vector<double> log_sum(out_n, 0.0);
  std::vector<int> log_count(out_n, 0);
  auto pv = partial.mutable_values();
  std::vector<KahanSum> acc(out_n);

  const int decade_start = std::max(1, n_max / 10);
  double weight = 1.0;  // mu^n
  for (int n = 0; n <= n_max; ++n) {
    // accumulate the current term on the output box
    for (std::size_t i = 0; i < out_n; ++i) {
      const double t = cur[i];
      if (t == 0.0) continue;
      acc[i] += weight * t;
      if (mu == 1.0 && n >= decade_start) {
        log_sum[i] += std::log(t) + 0.5 * d * std::log(static_cast<double>(n));
        ++log_count[i];
      }
    }
    if (n == n_max) break;
    // one step of the walk, pulled from the neighbours of each orbit representative
    std::fill(nxt.begin(), nxt.end(), 0.0);
    const auto& reps = parity_list[(n + 1) % 2];
    parallel_for(prefix[n + 1], [&](std::size_t b, std::size_t e) {
      std::vector<int> t(d), nb(d);
      for (std::size_t q = b; q < e; ++q) {
        space.unrank(reps[q], t);
        KahanSum s;
        for (int j = 0; j < d; ++j)
          for (int step : {1, -1}) {
            nb = t;
            nb[j] = std::abs(nb[j] + step);
            resort_at(nb, j);
            s += cur[space.rank(nb)];
          }
        nxt[reps[q]] = hop * s.value();
      }
    }, 4096);
    cur.swap(nxt);
    weight *= mu;
  }

  auto tv = tail.mutable_values();
  for (std::size_t i = 0; i < out_n; ++i) {
    pv[i] = acc[i].value();
    if (mu < 1.0) {
      // D^{*n}(x) <= 1, so the remainder is at most mu^{n_max+1}/(1-mu)
      tv[i] = std::pow(mu, n_max + 1) / (1.0 - mu);
    } else if (log_count[i] > 0) {
      const double c = std::exp(log_sum[i] / log_count[i]);
      // only every other n contributes (parity), hence the factor 1/2
      tv[i] = 0.5 * c * std::pow(static_cast<double>(n_max), 1.0 - 0.5 * d) / (0.5 * d - 1.0);
    }
  }
  return {partial, tail, n_max};
}

WalkSumResult walk_sum(double mu, int d, const LatticePoint& x, int n_max) {
  if (x.dim() != d) throw PreconditionError("point dimension mismatch");
  int l1 = 0, linf = 0;
  for (int c : x.coords) {
    l1 += std::abs(c);
    linf = std::max(linf, std::abs(c));
  }
  if (n_max < l1) throw PreconditionError("n_max is shorter than the l1 distance to x");
  const WalkSumBox box = walk_sum_box(mu, d, linf, n_max);
  WalkSumResult r;
  r.partial_sum = box.partial(x.coords);
  r.tail_estimate = box.tail(x.coords);
  r.value = r.partial_sum + r.tail_estimate;
  r.n_max = n_max;
  return r;
}

namespace {

LatticeFunction raw_spectral(int d, double mu, int R, const TorusGrid& grid) {
  const LatticeFunction A = LatticeFunction::delta(d) - mu * LatticeFunction::nearest_neighbour(d);
  return inverse_on_box(forward_transform(A, grid), R, true);
}

}  // namespace

LatticeFunction green_function(const GreenSpec& spec, const TorusGrid& grid) {
  const int d = spec.dim;
  if (d <= 2) throw PreconditionError("d > 2 required");
  if (!(spec.mu > 0.0 && spec.mu <= 1.0)) throw PreconditionError("mu must lie in (0, 1]");
  if (spec.box_radius < 0) throw PreconditionError("box radius must be nonnegative");

  if (spec.method == GreenMethod::walk_sum) {
    const int n = spec.walk_steps > 0 ? spec.walk_steps : default_walk_steps(spec.mu);
    const WalkSumBox box = walk_sum_box(spec.mu, d, spec.box_radius, n);
    return box.partial + box.tail;
  }

  if (grid.dim() != d) throw PreconditionError("grid dimension differs from GreenSpec::dim");
  if (spec.mu == 1.0 && !grid.shifted())
    throw PreconditionError("mu = 1 needs a shifted grid (the unshifted grid contains k = 0)");
  const Periodization per =
      spec.periodization.value_or(spec.mu == 1.0 ? Periodization::richardson : Periodization::raw);
  if (per == Periodization::raw) return raw_spectral(d, spec.mu, spec.box_radius, grid);

  if (grid.points() % 4 != 0) throw PreconditionError("Richardson extrapolation needs M divisible by 4");
  const LatticeFunction fine = raw_spectral(d, spec.mu, spec.box_radius, grid);
  // the half grid is below 4R by construction; the extrapolation cancels its leading image term
  const LatticeFunction coarse = [&] {
    const WarningMute mute;
    return raw_spectral(d, spec.mu, spec.box_radius, TorusGrid(d, grid.points() / 2, grid.shifted()));
  }();
  const double w = std::pow(2.0, d - 2);
  return (1.0 / (w - 1.0)) * (w * fine - coarse);
}

AsymptoticReport asymptotic_report(const LatticeFunction& C, int d, double r_min, double r_max) {
  if (C.dim() != d) throw PreconditionError("dimension mismatch");
  if (r_max > C.radius() || r_min < 0.0 || r_min >= r_max)
    throw PreconditionError("annulus must lie inside the box");
  const double ad = a_d(d);
  AsymptoticReport rep;
  rep.r_min = r_min;
  rep.r_max = r_max;
  std::vector<double> lx, ly, w;
  std::map<long long, double> shell_max;
  double max_res = 0.0;
  C.for_each([&](std::span<const int> x, double weight, double v) {
    long long r2 = 0;
    for (int c : x) r2 += static_cast<long long>(c) * c;
    const double r = std::sqrt(static_cast<double>(r2));
    if (r < r_min || r > r_max) return;
    const double fr = std::max(r, 1.0);
    const double scaled = std::abs(v - ad * std::pow(fr, 2 - d)) * std::pow(fr, d);
    max_res = std::max(max_res, scaled);
    auto& sm = shell_max[r2];
    sm = std::max(sm, scaled);
    if (v <= 0.0) return;
    lx.push_back(std::log(fr));
    ly.push_back(std::log(v));
    w.push_back(weight);
  });
  if (lx.size() < 2 || shell_max.size() < 2)
    throw PreconditionError("annulus holds too few positive values for a fit");
  const LinearFit fit = linear_fit(lx, ly, w);
  rep.fitted_exponent = -fit.slope;
  rep.free_amplitude = std::exp(fit.intercept);
  rep.r_squared = fit.r_squared;
  rep.fitted_amplitude = std::exp(fixed_slope_intercept(lx, ly, -(d - 2.0), w));
  rep.max_scaled_residual = max_res;
  rep.points = static_cast<int>(lx.size());
  std::vector<double> sx, sy;
  for (const auto& [r2, m] : shell_max) {
    sx.push_back(0.5 * std::log(static_cast<double>(r2)));
    sy.push_back(m);
  }
  rep.residual_trend = linear_fit(sx, sy).slope;
  return rep;
}

}  // namespace latdeconv
