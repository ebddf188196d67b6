#include "latdeconv/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "latdeconv/common.hpp"
#include "latdeconv/fit.hpp"
#include "latdeconv/parallel.hpp"

namespace latdeconv {

std::string to_string(SymmetryTag tag) {
  switch (tag) {
    case SymmetryTag::declared: return "declared";
    case SymmetryTag::verified: return "verified";
    default: return "none";
  }
}

SymmetryTag symmetry_tag_from_string(const std::string& s) {
  if (s == "declared") return SymmetryTag::declared;
  if (s == "verified") return SymmetryTag::verified;
  if (s == "none") return SymmetryTag::none;
  throw PreconditionError("unknown symmetry tag '" + s + "'");
}

LatticeFunction::LatticeFunction(int dim, int radius, Layout layout)
    : dim_(dim), radius_(radius), layout_(layout) {
  if (dim < 1) throw PreconditionError("lattice dimension must be at least 1");
  if (radius < 0) throw PreconditionError("box radius must be nonnegative");
  if (layout == Layout::box) {
    const double cells = std::pow(2.0 * radius + 1.0, dim);
    require_cells(cells, "box-layout lattice function");
    values_.assign(static_cast<std::size_t>(cells), 0.0);
  } else {
    orbit_index_ = SortedTuples(radius + 1, dim);
    require_cells(static_cast<double>(orbit_index_.size()), "orbit-layout lattice function");
    values_.assign(orbit_index_.size(), 0.0);
    tag_ = SymmetryTag::verified;
  }
}

LatticeFunction LatticeFunction::zeros(int dim, int radius, Layout layout) {
  return LatticeFunction(dim, radius, layout);
}

LatticeFunction LatticeFunction::delta(int dim, Layout layout) {
  LatticeFunction f(dim, 0, layout);
  f.values_[0] = 1.0;
  if (layout == Layout::box) f.tag_ = SymmetryTag::verified;
  return f;
}

LatticeFunction LatticeFunction::nearest_neighbour(int dim, Layout layout) {
  LatticeFunction f(dim, 1, layout);
  std::vector<int> x(dim, 0);
  for (int j = 0; j < dim; ++j)
    for (int s : {-1, 1}) {
      x[j] = s;
      f.set(x, 1.0 / (2.0 * dim));
      x[j] = 0;
    }
  if (layout == Layout::box) f.tag_ = SymmetryTag::verified;
  return f;
}

LatticeFunction LatticeFunction::from_function(
    int dim, int radius, Layout layout, const std::function<double(std::span<const int>)>& fn) {
  LatticeFunction f(dim, radius, layout);
  std::vector<int> x(dim);
  for (std::size_t i = 0; i < f.values_.size(); ++i) {
    f.point_of(i, x);
    f.values_[i] = fn(x);
  }
  return f;
}

void LatticeFunction::set_symmetry_tag(SymmetryTag tag) {
  if (layout_ == Layout::orbits) return;
  if (tag == SymmetryTag::verified && !check_symmetry(*this).symmetric)
    throw PreconditionError("cannot tag an asymmetric function as verified");
  tag_ = tag;
}

std::span<double> LatticeFunction::mutable_values() {
  if (layout_ == Layout::box && tag_ == SymmetryTag::verified) tag_ = SymmetryTag::declared;
  return values_;
}

std::size_t LatticeFunction::index_of(std::span<const int> x) const {
  if (static_cast<int>(x.size()) != dim_) throw PreconditionError("point dimension mismatch");
  if (layout_ == Layout::box) {
    std::size_t idx = 0;
    const std::size_t side = 2 * radius_ + 1;
    for (int j = 0; j < dim_; ++j) {
      if (x[j] < -radius_ || x[j] > radius_) return npos;
      idx = idx * side + static_cast<std::size_t>(x[j] + radius_);
    }
    return idx;
  }
  int buf[32];
  std::vector<int> heap;
  int* a = buf;
  if (dim_ > 32) {
    heap.resize(dim_);
    a = heap.data();
  }
  for (int j = 0; j < dim_; ++j) {
    a[j] = std::abs(x[j]);
    if (a[j] > radius_) return npos;
  }
  std::sort(a, a + dim_);
  return orbit_index_.rank(std::span<const int>(a, dim_));
}

double LatticeFunction::operator()(std::span<const int> x) const {
  const std::size_t i = index_of(x);
  return i == npos ? 0.0 : values_[i];
}

void LatticeFunction::set(std::span<const int> x, double value) {
  if (!std::isfinite(value)) throw PreconditionError("lattice values must be finite");
  const std::size_t i = index_of(x);
  if (i == npos) throw PreconditionError("point outside the box");
  values_[i] = value;
  if (layout_ == Layout::box && tag_ == SymmetryTag::verified) tag_ = SymmetryTag::declared;
}

void LatticeFunction::point_of(std::size_t i, std::span<int> out) const {
  if (layout_ == Layout::box) {
    const std::size_t side = 2 * radius_ + 1;
    for (int j = dim_ - 1; j >= 0; --j) {
      out[j] = static_cast<int>(i % side) - radius_;
      i /= side;
    }
  } else {
    orbit_index_.unrank(i, out);
  }
}

double LatticeFunction::weight_of(std::size_t i) const {
  if (layout_ == Layout::box) return 1.0;
  std::vector<int> x(dim_);
  orbit_index_.unrank(i, x);
  return static_cast<double>(orbit_size(x));
}

LatticeFunction LatticeFunction::to_box() const {
  if (layout_ == Layout::box) return *this;
  LatticeFunction out(dim_, radius_, Layout::box);
  std::vector<int> x(dim_);
  for (std::size_t i = 0; i < out.values_.size(); ++i) {
    out.point_of(i, x);
    out.values_[i] = (*this)(x);
  }
  out.tag_ = SymmetryTag::verified;
  return out;
}

LatticeFunction LatticeFunction::to_orbits() const {
  if (layout_ == Layout::orbits) return *this;
  const SymmetryReport rep = check_symmetry(*this);
  if (!rep.symmetric)
    throw PreconditionError("function is not hyperoctahedrally symmetric (violation at x with |x|^2=" +
                            std::to_string(rep.witness_point->norm_squared()) + ")");
  LatticeFunction out(dim_, radius_, Layout::orbits);
  std::vector<int> x(dim_);
  for (std::size_t i = 0; i < out.values_.size(); ++i) {
    out.point_of(i, x);
    out.values_[i] = (*this)(x);
  }
  return out;
}

LatticeFunction LatticeFunction::resized(int radius) const {
  LatticeFunction out(dim_, radius, layout_);
  std::vector<int> x(dim_);
  for (std::size_t i = 0; i < out.values_.size(); ++i) {
    out.point_of(i, x);
    out.values_[i] = (*this)(x);
  }
  if (layout_ == Layout::box) out.tag_ = tag_;
  return out;
}

double LatticeFunction::sup_norm() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

LatticeFunction& LatticeFunction::operator*=(double c) {
  for (double& v : values_) v *= c;
  return *this;
}

LatticeFunction LatticeFunction::combine(const LatticeFunction& a, const LatticeFunction& b,
                                         double sb) {
  if (a.dim_ != b.dim_) throw PreconditionError("dimension mismatch");
  const Layout layout =
      (a.layout_ == Layout::orbits && b.layout_ == Layout::orbits) ? Layout::orbits : Layout::box;
  LatticeFunction out(a.dim_, std::max(a.radius_, b.radius_), layout);
  std::vector<int> x(a.dim_);
  for (std::size_t i = 0; i < out.values_.size(); ++i) {
    out.point_of(i, x);
    out.values_[i] = a(x) + sb * b(x);
  }
  if (layout == Layout::box && a.tag_ != SymmetryTag::none && b.tag_ != SymmetryTag::none)
    out.tag_ = SymmetryTag::declared;
  return out;
}

LatticeFunction operator+(const LatticeFunction& a, const LatticeFunction& b) {
  return LatticeFunction::combine(a, b, 1.0);
}
LatticeFunction operator-(const LatticeFunction& a, const LatticeFunction& b) {
  return LatticeFunction::combine(a, b, -1.0);
}
LatticeFunction operator*(double c, const LatticeFunction& f) {
  LatticeFunction out = f;
  out *= c;
  return out;
}

std::string HyperoctahedralElement::describe() const {
  std::ostringstream os;
  bool identity_perm = true;
  for (std::size_t i = 0; i < perm.size(); ++i) identity_perm &= (perm[i] == static_cast<int>(i));
  if (identity_perm) {
    for (std::size_t i = 0; i < sign.size(); ++i)
      if (sign[i] < 0) os << "reflection in coordinate " << i + 1;
  } else {
    std::vector<int> moved;
    for (std::size_t i = 0; i < perm.size(); ++i)
      if (perm[i] != static_cast<int>(i)) moved.push_back(static_cast<int>(i) + 1);
    os << "transposition of coordinates " << moved.at(0) << " and " << moved.at(1);
  }
  return os.str();
}

SymmetryReport check_symmetry(const LatticeFunction& f) {
  SymmetryReport report;
  if (f.layout() == Layout::orbits) return report;
  const int d = f.dim();
  std::vector<HyperoctahedralElement> generators;
  for (int j = 0; j < d; ++j) {
    HyperoctahedralElement g{std::vector<int>(d), std::vector<int>(d, 1)};
    for (int i = 0; i < d; ++i) g.perm[i] = i;
    g.sign[j] = -1;
    generators.push_back(g);
  }
  for (int j = 0; j + 1 < d; ++j) {
    HyperoctahedralElement g{std::vector<int>(d), std::vector<int>(d, 1)};
    for (int i = 0; i < d; ++i) g.perm[i] = i;
    std::swap(g.perm[j], g.perm[j + 1]);
    generators.push_back(g);
  }
  const auto values = f.values();
  std::vector<int> x(d), gx(d);
  for (const auto& g : generators) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      f.point_of(i, x);
      for (int k = 0; k < d; ++k) gx[k] = g.sign[k] * x[g.perm[k]];
      if (f(gx) != values[i]) {
        report.symmetric = false;
        report.witness_point = LatticePoint{x};
        report.witness_element = g;
        return report;
      }
    }
  }
  return report;
}

LatticeFunction symmetrize(const LatticeFunction& f) {
  if (f.layout() == Layout::orbits) return f;
  LatticeFunction out = LatticeFunction::zeros(f.dim(), f.radius(), Layout::orbits);
  auto vals = out.mutable_values();
  std::vector<int> rep(f.dim());
  for (std::size_t i = 0; i < vals.size(); ++i) {
    out.point_of(i, rep);
    KahanSum s;
    double count = 0.0;
    for_each_orbit_point(rep, [&](std::span<const int> p) {
      s += f(p);
      count += 1.0;
    });
    vals[i] = s.value() / count;
  }
  return out;
}

double moment(const LatticeFunction& f, double power, bool absolute) {
  if (power < 0.0) throw PreconditionError("moment power must be nonnegative");
  KahanSum s;
  f.for_each([&](std::span<const int> x, double w, double v) {
    if (v == 0.0) return;
    long long r2 = 0;
    for (int c : x) r2 += static_cast<long long>(c) * c;
    double radial;
    if (power == 0.0)
      radial = 1.0;
    else if (power == 2.0)
      radial = static_cast<double>(r2);
    else
      radial = std::pow(static_cast<double>(r2), 0.5 * power);
    s += w * radial * (absolute ? std::abs(v) : v);
  });
  return s.value();
}

namespace {

struct SupportEntry {
  std::vector<int> x;
  double v;
};

std::vector<SupportEntry> expanded_support(const LatticeFunction& f) {
  std::vector<SupportEntry> out;
  f.for_each([&](std::span<const int> x, double, double v) {
    if (v == 0.0) return;
    if (f.layout() == Layout::box) {
      out.push_back({std::vector<int>(x.begin(), x.end()), v});
    } else {
      for_each_orbit_point(x, [&](std::span<const int> p) {
        out.push_back({std::vector<int>(p.begin(), p.end()), v});
      });
    }
  });
  return out;
}

std::size_t nonzero_count(const LatticeFunction& f) {
  std::size_t n = 0;
  f.for_each([&](std::span<const int>, double w, double v) {
    if (v != 0.0) n += static_cast<std::size_t>(w);
  });
  return n;
}

}  // namespace

LatticeFunction convolve(const LatticeFunction& f, const LatticeFunction& g) {
  if (f.dim() != g.dim()) throw PreconditionError("convolve: dimension mismatch");
  const int d = f.dim();
  const int R = f.radius() + g.radius();
  if (f.layout() == Layout::orbits && g.layout() == Layout::orbits) {
    const bool f_small = nonzero_count(f) <= nonzero_count(g);
    const LatticeFunction& a = f_small ? f : g;
    const LatticeFunction& b = f_small ? g : f;
    const auto support = expanded_support(a);
    LatticeFunction out = LatticeFunction::zeros(d, R, Layout::orbits);
    auto vals = out.mutable_values();
    parallel_for(vals.size(), [&](std::size_t begin, std::size_t end) {
      std::vector<int> x(d), y(d);
      for (std::size_t i = begin; i < end; ++i) {
        out.point_of(i, x);
        KahanSum s;
        for (const auto& e : support) {
          for (int k = 0; k < d; ++k) y[k] = x[k] - e.x[k];
          const double bv = b(y);
          if (bv != 0.0) s += e.v * bv;
        }
        vals[i] = s.value();
      }
    }, 64);
    return out;
  }
  const LatticeFunction fb = f.to_box();
  const LatticeFunction gb = g.to_box();
  const auto sf = expanded_support(fb);
  const auto sg = expanded_support(gb);
  LatticeFunction out = LatticeFunction::zeros(d, R, Layout::box);
  auto vals = out.mutable_values();
  std::vector<int> z(d);
  for (const auto& a : sf)
    for (const auto& b : sg) {
      for (int k = 0; k < d; ++k) z[k] = a.x[k] + b.x[k];
      vals[out.index_of(z)] += a.v * b.v;
    }
  return out;
}

LatticeFunction apply_monomial(const LatticeFunction& f, const MultiIndex& alpha) {
  if (alpha.dim() != f.dim()) throw PreconditionError("apply_monomial: multi-index dimension mismatch");
  for (int a : alpha.orders)
    if (a < 0) throw PreconditionError("multi-index orders must be nonnegative");
  if (alpha.is_zero()) return f;
  LatticeFunction out = f.to_box();
  auto vals = out.mutable_values();
  std::vector<int> x(f.dim());
  for (std::size_t i = 0; i < vals.size(); ++i) {
    out.point_of(i, x);
    double m = 1.0;
    for (int j = 0; j < f.dim(); ++j)
      for (int p = 0; p < alpha.orders[j]; ++p) m *= x[j];
    vals[i] *= m;
  }
  out.set_symmetry_tag(SymmetryTag::none);
  return out;
}

DecayEnvelope fit_envelope(const LatticeFunction& f, double r_min, double r_max) {
  if (r_min < 1.0) throw PreconditionError("fit_envelope: r_min must be at least 1");
  if (r_max > f.radius()) throw PreconditionError("fit_envelope: r_max exceeds the box radius");
  if (r_max <= r_min) throw PreconditionError("fit_envelope: empty window");
  DecayEnvelope env;
  env.r_min = r_min;
  env.r_max = r_max;

  std::vector<double> lx, ly, w;
  std::set<long long> radii;
  f.for_each([&](std::span<const int> x, double weight, double v) {
    long long r2 = 0;
    for (int c : x) r2 += static_cast<long long>(c) * c;
    const double r = std::sqrt(static_cast<double>(r2));
    if (r < r_min || r > r_max || v == 0.0) return;
    lx.push_back(std::log(r));
    ly.push_back(std::log(std::abs(v)));
    w.push_back(weight);
    radii.insert(r2);
  });
  if (lx.empty()) {
    env.zero_window = true;
    env.b = std::numeric_limits<double>::infinity();
    env.K = 0.0;
    return env;
  }
  if (radii.size() < 5)
    throw PreconditionError("fit_envelope: fewer than 5 distinct radii with nonzero values in window");

  const LinearFit fit = linear_fit(lx, ly, w);
  env.b = -fit.slope;
  // headroom over every box point beyond r_min, so the envelope also covers
  // the corners outside the fit window
  double headroom = -std::numeric_limits<double>::infinity();
  f.for_each([&](std::span<const int> x, double, double v) {
    long long r2 = 0;
    for (int c : x) r2 += static_cast<long long>(c) * c;
    const double r = std::sqrt(static_cast<double>(r2));
    if (r < r_min || v == 0.0) return;
    headroom = std::max(headroom, std::log(std::abs(v)) - (fit.intercept + fit.slope * std::log(r)));
  });
  // relative slack absorbs rounding in exp/log on the window maximiser
  env.K = std::exp(fit.intercept + headroom) * (1.0 + 1e-12);

  double violation = -std::numeric_limits<double>::infinity();
  f.for_each([&](std::span<const int> x, double, double v) {
    long long r2 = 0;
    for (int c : x) r2 += static_cast<long long>(c) * c;
    const double r = std::sqrt(static_cast<double>(r2));
    if (r < r_min) return;
    violation = std::max(violation, std::abs(v) - env.K * std::pow(std::max(r, 1.0), -env.b));
  });
  env.max_violation = violation;
  return env;
}

}  // namespace latdeconv
