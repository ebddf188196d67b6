#include "latdeconv/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>

#include "latdeconv/common.hpp"
#include "latdeconv/parallel.hpp"
#include "separable.hpp"

namespace latdeconv {

using std::numbers::pi;

// ---------------------------------------------------------------- TorusGrid

TorusGrid::TorusGrid(int dim, int points, bool shifted)
    : dim_(dim), points_(points), shifted_(shifted) {
  if (dim < 1) throw PreconditionError("torus dimension must be at least 1");
  if (points < 2 || points % 2 != 0) throw PreconditionError("points per axis must be even and >= 2");
}

double TorusGrid::spacing() const { return 2.0 * pi / points_; }

double TorusGrid::node(int i) const {
  if (shifted_) {
    const int n = i < points_ / 2 ? i : i - points_;
    return (2.0 * n + 1.0) * pi / points_;
  }
  const int n = i <= points_ / 2 ? i : i - points_;
  return 2.0 * pi * n / points_;
}

double TorusGrid::half_node(int h) const {
  return shifted_ ? (2.0 * h + 1.0) * pi / points_ : 2.0 * pi * h / points_;
}

int TorusGrid::half_index(int i) const {
  if (shifted_) return i < points_ / 2 ? i : points_ - 1 - i;
  return i <= points_ / 2 ? i : points_ - i;
}

int TorusGrid::half_weight(int h) const {
  if (shifted_) return 2;
  return (h == 0 || h == points_ / 2) ? 1 : 2;
}

double TorusGrid::total_nodes() const { return std::pow(static_cast<double>(points_), dim_); }

// ------------------------------------------------------------ SpectralField

SpectralField SpectralField::dense(const TorusGrid& grid) {
  SpectralField f;
  f.grid_ = grid;
  f.layout_ = FieldLayout::dense;
  f.lead_ = grid.dim();
  require_cells(grid.total_nodes(), "dense spectral field");
  f.values_.assign(static_cast<std::size_t>(grid.total_nodes()), cplx{});
  return f;
}

SpectralField SpectralField::reduced(const TorusGrid& grid, int lead_axes) {
  if (lead_axes < 0 || lead_axes > grid.dim()) throw PreconditionError("invalid lead axis count");
  SpectralField f;
  f.grid_ = grid;
  f.layout_ = FieldLayout::reduced;
  f.lead_ = lead_axes;
  const int m = grid.dim() - lead_axes;
  if (m > 0) {
    f.trailing_index_ = SortedTuples(grid.half_count(), m);
    f.trailing_count_ = f.trailing_index_.size();
  }
  const double cells =
      std::pow(static_cast<double>(grid.points()), lead_axes) * static_cast<double>(f.trailing_count_);
  require_cells(cells, "reduced spectral field");
  f.values_.assign(static_cast<std::size_t>(cells), cplx{});
  return f;
}

void SpectralField::storage_position(std::size_t i, std::span<int> lead,
                                     std::span<int> trailing) const {
  const int M = grid_.points();
  std::size_t rest = layout_ == FieldLayout::dense ? i : i / trailing_count_;
  for (int j = lead_ - 1; j >= 0; --j) {
    lead[j] = static_cast<int>(rest % M);
    rest /= M;
  }
  if (layout_ == FieldLayout::reduced && grid_.dim() > lead_)
    trailing_index_.unrank(i % trailing_count_, trailing);
}

cplx SpectralField::at(std::span<const int> node_index) const {
  const int d = grid_.dim();
  const int M = grid_.points();
  if (static_cast<int>(node_index.size()) != d) throw PreconditionError("node index dimension mismatch");
  std::size_t idx = 0;
  for (int j = 0; j < lead_; ++j) idx = idx * M + static_cast<std::size_t>(node_index[j]);
  if (layout_ == FieldLayout::dense) return values_[idx];
  std::vector<int> t(d - lead_);
  for (int j = lead_; j < d; ++j) t[j - lead_] = grid_.half_index(node_index[j]);
  std::sort(t.begin(), t.end());
  const std::size_t r = t.empty() ? 0 : trailing_index_.rank(t);
  return values_[idx * trailing_count_ + r];
}

void SpectralField::node_of(std::size_t i, std::span<double> k) const {
  const int d = grid_.dim();
  std::vector<int> lead(lead_), trailing(d - lead_);
  storage_position(i, lead, trailing);
  for (int j = 0; j < lead_; ++j) k[j] = grid_.node(lead[j]);
  for (int j = lead_; j < d; ++j) k[j] = grid_.half_node(trailing[j - lead_]);
}

std::vector<double> SpectralField::multiplicities() const {
  std::vector<double> m(values_.size(), 1.0);
  if (layout_ == FieldLayout::dense || grid_.dim() == lead_) return m;
  std::vector<double> tm(trailing_count_);
  std::vector<int> t(grid_.dim() - lead_);
  trailing_index_.first(t);
  for (std::size_t r = 0; r < trailing_count_; ++r) {
    double w = static_cast<double>(permutation_count(t));
    for (int h : t) w *= grid_.half_weight(h);
    tm[r] = w;
    trailing_index_.next(t);
  }
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = tm[i % trailing_count_];
  return m;
}

double SpectralField::multiplicity(std::size_t i) const {
  if (layout_ == FieldLayout::dense || grid_.dim() == lead_) return 1.0;
  std::vector<int> t(grid_.dim() - lead_);
  trailing_index_.unrank(i % trailing_count_, t);
  double w = static_cast<double>(permutation_count(t));
  for (int h : t) w *= grid_.half_weight(h);
  return w;
}

double SpectralField::max_abs() const {
  return deterministic_max(values_.size(), [&](std::size_t i) { return std::abs(values_[i]); });
}

double SpectralField::max_imag() const {
  return deterministic_max(values_.size(), [&](std::size_t i) { return std::abs(values_[i].imag()); });
}

SpectralField SpectralField::to_dense() const {
  if (layout_ == FieldLayout::dense) return *this;
  SpectralField out = dense(grid_);
  const int d = grid_.dim();
  const int M = grid_.points();
  parallel_for(out.values_.size(), [&](std::size_t b, std::size_t e) {
    std::vector<int> idx(d);
    for (std::size_t i = b; i < e; ++i) {
      std::size_t rest = i;
      for (int j = d - 1; j >= 0; --j) {
        idx[j] = static_cast<int>(rest % M);
        rest /= M;
      }
      out.values_[i] = at(idx);
    }
  }, 4096);
  return out;
}

SpectralField SpectralField::with_lead_axes(int p) const {
  if (layout_ == FieldLayout::dense || p == lead_) return *this;
  if (p < lead_) throw PreconditionError("cannot reduce the number of lead axes");
  SpectralField out = reduced(grid_, p);
  const int d = grid_.dim();
  parallel_for(out.values_.size(), [&](std::size_t b, std::size_t e) {
    std::vector<int> lead(p), trailing(d - p), full(d);
    for (std::size_t i = b; i < e; ++i) {
      out.storage_position(i, lead, trailing);
      for (int j = 0; j < p; ++j) full[j] = lead[j];
      for (int j = p; j < d; ++j) full[j] = trailing[j - p];  // half index h is FFT index h
      out.values_[i] = at(full);
    }
  }, 4096);
  return out;
}

SpectralField SpectralField::reciprocal(double guard) const {
  SpectralField out = *this;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (std::abs(values_[i]) < guard) {
      std::vector<double> k(grid_.dim());
      node_of(i, k);
      std::ostringstream os;
      os << "pole on grid: |value| = " << std::abs(values_[i]) << " at node k = (";
      for (int j = 0; j < grid_.dim(); ++j) os << (j ? ", " : "") << k[j];
      os << ")";
      throw PreconditionError(os.str());
    }
    out.values_[i] = 1.0 / values_[i];
  }
  return out;
}

SpectralField& SpectralField::operator*=(cplx c) {
  for (auto& v : values_) v *= c;
  return *this;
}

SpectralField SpectralField::binary(const SpectralField& a, const SpectralField& b,
                                    const std::function<cplx(cplx, cplx)>& op) {
  if (a.grid_.dim() != b.grid_.dim() || a.grid_.points() != b.grid_.points() ||
      a.grid_.shifted() != b.grid_.shifted())
    throw PreconditionError("spectral fields live on different grids");
  if (a.layout_ != b.layout_ || a.lead_ != b.lead_)
    throw PreconditionError("spectral fields have different layouts");
  SpectralField out = a;
  for (std::size_t i = 0; i < out.values_.size(); ++i) out.values_[i] = op(a.values_[i], b.values_[i]);
  return out;
}

SpectralField operator+(const SpectralField& a, const SpectralField& b) {
  return SpectralField::binary(a, b, [](cplx x, cplx y) { return x + y; });
}
SpectralField operator-(const SpectralField& a, const SpectralField& b) {
  return SpectralField::binary(a, b, [](cplx x, cplx y) { return x - y; });
}
SpectralField operator*(const SpectralField& a, const SpectralField& b) {
  return SpectralField::binary(a, b, [](cplx x, cplx y) { return x * y; });
}
SpectralField operator/(const SpectralField& a, const SpectralField& b) {
  return SpectralField::binary(a, b, [](cplx x, cplx y) { return x / y; });
}
SpectralField operator*(cplx c, const SpectralField& a) {
  SpectralField out = a;
  out *= c;
  return out;
}

// -------------------------------------------------------------- transforms

namespace {

std::mutex fftw_plan_mutex;

cplx ipow(int a) {
  switch (a % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

// v on a d-dimensional array of extent n_in per axis; kernels[j] maps axis j
// from n_in to n_out[j] entries.
std::vector<cplx> dense_separable(std::vector<cplx> data, int d, int n_in,
                                  const std::vector<detail::AxisKernel<cplx>>& kernels) {
  std::vector<int> shape(d, n_in);
  for (int axis = 0; axis < d; ++axis) {
    const auto& K = kernels[axis];
    std::size_t outer = 1, inner = 1;
    for (int j = 0; j < axis; ++j) outer *= shape[j];
    for (int j = axis + 1; j < d; ++j) inner *= shape[j];
    const std::size_t n_in_axis = shape[axis];
    std::vector<cplx> next(outer * K.n_out * inner);
    parallel_for(outer, [&](std::size_t ob, std::size_t oe) {
      for (std::size_t o = ob; o < oe; ++o)
        for (int ko = 0; ko < K.n_out; ++ko) {
          cplx* dst = next.data() + (o * K.n_out + ko) * inner;
          for (std::size_t ki = 0; ki < n_in_axis; ++ki) {
            const cplx c = K(ko, static_cast<int>(ki));
            if (c == cplx{}) continue;
            const cplx* src = data.data() + (o * n_in_axis + ki) * inner;
            for (std::size_t t = 0; t < inner; ++t) dst[t] += c * src[t];
          }
        }
    });
    data.swap(next);
    shape[axis] = K.n_out;
  }
  return data;
}

detail::AxisKernel<cplx> box_kernel(const TorusGrid& grid, int radius, int order) {
  detail::AxisKernel<cplx> K;
  K.n_out = grid.points();
  K.n_in = 2 * radius + 1;
  K.m.resize(static_cast<std::size_t>(K.n_out) * K.n_in);
  for (int o = 0; o < K.n_out; ++o)
    for (int x = -radius; x <= radius; ++x) {
      const double k = grid.node(o);
      cplx v = std::polar(1.0, k * x);
      if (order > 0) v *= ipow(order) * std::pow(static_cast<double>(x), order);
      K.m[static_cast<std::size_t>(o) * K.n_in + (x + radius)] = v;
    }
  return K;
}

SpectralField forward_direct_dense(const LatticeFunction& f, const TorusGrid& grid,
                                   const MultiIndex& alpha) {
  const LatticeFunction b = f.to_box();
  std::vector<cplx> data(b.values().begin(), b.values().end());
  std::vector<detail::AxisKernel<cplx>> kernels;
  for (int j = 0; j < f.dim(); ++j) kernels.push_back(box_kernel(grid, f.radius(), alpha.orders[j]));
  SpectralField out = SpectralField::dense(grid);
  auto res = dense_separable(std::move(data), f.dim(), 2 * f.radius() + 1, kernels);
  std::copy(res.begin(), res.end(), out.values().begin());
  return out;
}

SpectralField forward_fft(const LatticeFunction& f, const TorusGrid& grid) {
  const int d = grid.dim();
  const int M = grid.points();
  const int R = f.radius();
  if (M < 2 * R + 1)
    throw PreconditionError("FFT path needs M >= 2R+1 (M=" + std::to_string(M) +
                            ", R=" + std::to_string(R) + ")");
  SpectralField out = SpectralField::dense(grid);
  const std::size_t n = out.size();
  auto* buf = reinterpret_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
  if (!buf) throw std::bad_alloc();
  std::fill_n(reinterpret_cast<double*>(buf), 2 * n, 0.0);
  const double s = grid.shifted() ? pi / M : 0.0;
  f.for_each([&](std::span<const int> x, double, double v) {
    auto place = [&](std::span<const int> p) {
      std::size_t idx = 0;
      long sum = 0;
      for (int j = 0; j < d; ++j) {
        idx = idx * M + static_cast<std::size_t>(((p[j] % M) + M) % M);
        sum += p[j];
      }
      const cplx tw = v * std::polar(1.0, s * static_cast<double>(sum));
      buf[idx][0] += tw.real();
      buf[idx][1] += tw.imag();
    };
    if (f.layout() == Layout::box)
      place(x);
    else
      for_each_orbit_point(x, place);
  });
  std::vector<int> dims(d, M);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex);
    plan = fftw_plan_dft(d, dims.data(), buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex);
    fftw_destroy_plan(plan);
  }
  auto vals = out.values();
  for (std::size_t i = 0; i < n; ++i) vals[i] = {buf[i][0], buf[i][1]};
  fftw_free(buf);
  return out;
}

// Real cosine kernel from box offsets |x| in [0, R] to half nodes.
detail::AxisKernel<double> forward_cos_kernel(const TorusGrid& grid, int radius) {
  detail::AxisKernel<double> K;
  K.n_out = grid.half_count();
  K.n_in = radius + 1;
  K.m.resize(static_cast<std::size_t>(K.n_out) * K.n_in);
  for (int h = 0; h < K.n_out; ++h)
    for (int x = 0; x <= radius; ++x)
      K.m[static_cast<std::size_t>(h) * K.n_in + x] =
          x == 0 ? 1.0 : 2.0 * std::cos(grid.half_node(h) * x);
  return K;
}

// Lead-axis kernel from |x| in [0, R] to all M nodes for the order-a derivative.
detail::AxisKernel<cplx> lead_kernel(const TorusGrid& grid, int radius, int a) {
  detail::AxisKernel<cplx> K;
  K.n_out = grid.points();
  K.n_in = radius + 1;
  K.m.resize(static_cast<std::size_t>(K.n_out) * K.n_in);
  for (int o = 0; o < K.n_out; ++o) {
    const double k = grid.node(o);
    for (int x = 0; x <= radius; ++x) {
      cplx v;
      if (x == 0) {
        v = a == 0 ? 1.0 : 0.0;
      } else {
        const double xa = std::pow(static_cast<double>(x), a);
        // (ix)^a e^{ikx} + (-ix)^a e^{-ikx}
        v = ipow(a) * xa * (std::polar(1.0, k * x) + (a % 2 ? -1.0 : 1.0) * std::polar(1.0, -k * x));
      }
      K.m[static_cast<std::size_t>(o) * K.n_in + x] = v;
    }
  }
  return K;
}

SpectralField forward_symmetric(const LatticeFunction& f, const TorusGrid& grid,
                                const MultiIndex& alpha, int lead_axes) {
  const int d = f.dim();
  const int R = f.radius();
  const auto common = forward_cos_kernel(grid, R);
  SpectralField out = SpectralField::reduced(grid, lead_axes);
  if (lead_axes == 0) {
    const auto res = detail::symmetric_transform<double>(f.values(), R + 1, d, {}, common);
    auto vals = out.values();
    for (std::size_t i = 0; i < res.size(); ++i) vals[i] = res[i];
    return out;
  }
  std::vector<detail::AxisKernel<cplx>> lead;
  for (int j = 0; j < lead_axes; ++j) lead.push_back(lead_kernel(grid, R, alpha.orders[j]));
  detail::AxisKernel<cplx> ccommon{common.n_out, common.n_in,
                                   std::vector<cplx>(common.m.begin(), common.m.end())};
  std::vector<cplx> in(f.values().begin(), f.values().end());
  auto res = detail::symmetric_transform<cplx>(in, R + 1, d, lead, ccommon);
  std::copy(res.begin(), res.end(), out.values().begin());
  return out;
}

void check_grid(const LatticeFunction& f, const TorusGrid& grid) {
  if (f.dim() != grid.dim()) throw PreconditionError("lattice and grid dimensions differ");
}

}  // namespace

SpectralField forward_transform(const LatticeFunction& f, const TorusGrid& grid, TransformPath path) {
  check_grid(f, grid);
  if (f.layout() == Layout::orbits && path != TransformPath::fft)
    return forward_symmetric(f, grid, MultiIndex::zero(f.dim()), 0);
  if (path == TransformPath::fft) return forward_fft(f, grid);
  if (path == TransformPath::direct || grid.points() < 2 * f.radius() + 1)
    return forward_direct_dense(f, grid, MultiIndex::zero(f.dim()));
  return forward_fft(f, grid);
}

SpectralField spectral_derivative(const LatticeFunction& f, const MultiIndex& alpha,
                                  const TorusGrid& grid, TransformPath path, int min_lead_axes) {
  check_grid(f, grid);
  if (alpha.dim() != f.dim()) throw PreconditionError("multi-index dimension mismatch");
  for (int a : alpha.orders)
    if (a < 0) throw PreconditionError("multi-index orders must be nonnegative");
  const int d = f.dim();
  int last = -1;
  for (int j = 0; j < d; ++j)
    if (alpha.orders[j] != 0) last = j;
  if (f.layout() == Layout::orbits && path == TransformPath::automatic) {
    const int p = std::min(std::max(last + 1, min_lead_axes), d);
    return forward_symmetric(f, grid, alpha, p);
  }
  if (path == TransformPath::fft) {
    SpectralField out = forward_fft(apply_monomial(f, alpha), grid);
    out *= ipow(alpha.order());
    return out;
  }
  return forward_direct_dense(f, grid, alpha);
}

double lp_norm(const SpectralField& field, double p) {
  if (!(p >= 1.0)) throw PreconditionError("lp_norm needs p >= 1");
  const auto vals = field.values();
  if (std::isinf(p)) return field.max_abs();
  const std::vector<double> mult = field.multiplicities();
  const double total = deterministic_sum(vals.size(), [&](std::size_t i) {
    const double a = std::abs(vals[i]);
    const double ap = p == 1.0 ? a : (p == 2.0 ? std::norm(vals[i]) : std::pow(a, p));
    return mult[i] * ap;
  });
  const double mean = total / field.grid().total_nodes();
  return p == 1.0 ? mean : std::pow(mean, 1.0 / p);
}

InfraredReport infrared_check(const LatticeFunction& f, const TorusGrid& grid) {
  InfraredReport report;
  report.f_hat_zero = moment(f, 0.0);
  const SpectralField field = forward_transform(f, grid);
  const int d = grid.dim();
  std::vector<double> k(d);
  double best = std::numeric_limits<double>::infinity();
  const auto vals = field.values();
  for (std::size_t i = 0; i < vals.size(); ++i) {
    field.node_of(i, k);
    double k2 = 0.0;
    for (double c : k) k2 += c * c;
    if (k2 == 0.0) continue;
    const double ratio = (vals[i].real() - report.f_hat_zero) / k2;
    if (ratio < best) {
      best = ratio;
      report.argmin_node = k;
    }
  }
  report.K2_est = best;
  return report;
}

namespace {

LatticeFunction inverse_dense(const SpectralField& field, int radius) {
  const TorusGrid& grid = field.grid();
  const int d = grid.dim();
  const int M = grid.points();
  const std::size_t n = field.size();
  auto* buf = reinterpret_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
  if (!buf) throw std::bad_alloc();
  const auto vals = field.values();
  for (std::size_t i = 0; i < n; ++i) {
    buf[i][0] = vals[i].real();
    buf[i][1] = vals[i].imag();
  }
  std::vector<int> dims(d, M);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex);
    plan = fftw_plan_dft(d, dims.data(), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex);
    fftw_destroy_plan(plan);
  }
  const double s = grid.shifted() ? pi / M : 0.0;
  const double norm = 1.0 / grid.total_nodes();
  LatticeFunction out = LatticeFunction::zeros(d, radius, Layout::box);
  auto ov = out.mutable_values();
  std::vector<int> x(d);
  double max_re = 0.0, max_im = 0.0;
  for (std::size_t i = 0; i < ov.size(); ++i) {
    out.point_of(i, x);
    std::size_t idx = 0;
    long sum = 0;
    for (int j = 0; j < d; ++j) {
      idx = idx * M + static_cast<std::size_t>(((x[j] % M) + M) % M);
      sum += x[j];
    }
    const cplx v = cplx{buf[idx][0], buf[idx][1]} * std::polar(norm, -s * static_cast<double>(sum));
    ov[i] = v.real();
    max_re = std::max(max_re, std::abs(v.real()));
    max_im = std::max(max_im, std::abs(v.imag()));
  }
  fftw_free(buf);
  if (max_im > 1e-10 * std::max(max_re, 1e-4))
    throw InvariantError("inverse transform is not real: max imaginary part " + std::to_string(max_im));
  return out;
}

LatticeFunction inverse_symmetric(const SpectralField& field, int radius) {
  const TorusGrid& grid = field.grid();
  const int d = grid.dim();
  const int M = grid.points();
  const double scale = std::max(field.max_abs(), 1e-300);
  if (field.max_imag() > 1e-12 * scale)
    throw InvariantError("symmetric field has a non-negligible imaginary part");
  detail::AxisKernel<double> K;
  K.n_out = radius + 1;
  K.n_in = grid.half_count();
  K.m.resize(static_cast<std::size_t>(K.n_out) * K.n_in);
  for (int x = 0; x <= radius; ++x)
    for (int h = 0; h < K.n_in; ++h)
      K.m[static_cast<std::size_t>(x) * K.n_in + h] =
          grid.half_weight(h) * std::cos(grid.half_node(h) * x) / M;
  std::vector<double> in(field.size());
  for (std::size_t i = 0; i < in.size(); ++i) in[i] = field.values()[i].real();
  auto res = detail::symmetric_transform<double>(in, K.n_in, d, {}, K);
  LatticeFunction out = LatticeFunction::zeros(d, radius, Layout::orbits);
  std::copy(res.begin(), res.end(), out.mutable_values().begin());
  return out;
}

}  // namespace

LatticeFunction inverse_on_box(const SpectralField& field, int radius, bool reciprocal) {
  if (radius < 0) throw PreconditionError("box radius must be nonnegative");
  const TorusGrid& grid = field.grid();
  if (grid.points() < 4 * radius)
    warn("inverse_on_box: M=" + std::to_string(grid.points()) + " is below 4R=" +
         std::to_string(4 * radius) + "; periodic images may dominate near the box edge");
  const SpectralField v = reciprocal ? field.reciprocal() : field;
  if (v.layout() == FieldLayout::reduced && v.lead_axes() == 0) return inverse_symmetric(v, radius);
  return inverse_dense(v.to_dense(), radius);
}

void write_csv(const SpectralField& field, std::ostream& out) {
  const int d = field.grid().dim();
  for (int j = 0; j < d; ++j) out << 'k' << j + 1 << ',';
  out << "re,im\n" << std::setprecision(17);
  std::vector<double> k(d);
  const auto vals = field.values();
  for (std::size_t i = 0; i < vals.size(); ++i) {
    field.node_of(i, k);
    for (double c : k) out << c << ',';
    out << vals[i].real() << ',' << vals[i].imag() << '\n';
  }
}

}  // namespace latdeconv
