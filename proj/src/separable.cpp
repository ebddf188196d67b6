#include "separable.hpp"

#include <algorithm>

#include "latdeconv/common.hpp"
#include "latdeconv/orbits.hpp"
#include "latdeconv/parallel.hpp"

namespace latdeconv::detail {
namespace {

template <class T>
class Engine {
 public:
  Engine(int n_in, int d, std::span<const AxisKernel<T>> lead, const AxisKernel<T>& common)
      : n_in_(n_in), d_(d), p_(static_cast<int>(lead.size())), lead_(lead), common_(common),
        tuples_(n_in, d), out_tuples_(std::max(common.n_out, 1), d - p_) {
    for (int r = 0; r <= d; ++r) counts_.push_back(binomial(n_in + r - 1, r));
    for (const auto& k : lead)
      if (k.n_in != n_in) throw PreconditionError("kernel input size mismatch");
    if (p_ < d && common.n_in != n_in) throw PreconditionError("kernel input size mismatch");
    sym_count_ = p_ < d ? out_tuples_.size() : 1;
  }

  std::vector<T> run(std::span<const T> in) const {
    if (in.size() != counts_[d_]) throw PreconditionError("symmetric input has the wrong length");
    std::vector<T> out(output_size(), T{});
    const AxisKernel<T>& k0 = kernel(0);
    const std::size_t cnt = counts_[d_ - 1];
    std::vector<T> w0(static_cast<std::size_t>(k0.n_out) * cnt);
    parallel_for(cnt, [&](std::size_t b, std::size_t e) {
      std::vector<T> gather(n_in_);
      std::vector<std::size_t> pa(d_ + 1), sb(d_ + 1);
      std::vector<int> tuple(d_);
      peel(in.data(), d_, k0, 0, k0.n_out, w0.data(), cnt, b, e, gather, pa, sb, tuple);
    }, 256);

    const int strands = std::max(1, std::min(thread_count(), k0.n_out));
    parallel_for(static_cast<std::size_t>(strands), [&](std::size_t sb_, std::size_t se) {
      Workspace ws(*this);
      for (std::size_t s = sb_; s < se; ++s)
        for (int o = static_cast<int>(s); o < k0.n_out; o += strands) {
          const T* v = w0.data() + static_cast<std::size_t>(o) * cnt;
          if (p_ > 0) {
            descend(1, v, d_ - 1, 0, static_cast<std::size_t>(o), ws, out.data());
          } else {
            ws.sym.push_back(o);
            descend(1, v, d_ - 1, o, 0, ws, out.data());
            ws.sym.pop_back();
          }
        }
    });
    return out;
  }

  std::size_t output_size() const {
    std::size_t n = sym_count_;
    for (const auto& k : lead_) n *= static_cast<std::size_t>(k.n_out);
    return n;
  }

 private:
  struct Workspace {
    explicit Workspace(const Engine& e) : gather(e.n_in_), pa(e.d_ + 1), sb(e.d_ + 1), tuple(e.d_) {
      bufs.resize(e.d_);
      for (int level = 1; level < e.d_; ++level) {
        const int r = e.d_ - level;
        bufs[level].resize(static_cast<std::size_t>(e.kernel(level).n_out) * e.counts_[r - 1]);
      }
    }
    std::vector<std::vector<T>> bufs;
    std::vector<T> gather;
    std::vector<std::size_t> pa, sb;
    std::vector<int> tuple;
    std::vector<int> sym;
  };

  const AxisKernel<T>& kernel(int level) const { return level < p_ ? lead_[level] : common_; }

  // V over sorted r-tuples -> W[(o - lo) * cnt + q] for q in [qb, qe).
  void peel(const T* V, int r, const AxisKernel<T>& K, int lo, int hi, T* W, std::size_t cnt,
            std::size_t qb, std::size_t qe, std::vector<T>& g, std::vector<std::size_t>& pa,
            std::vector<std::size_t>& sb, std::vector<int>& t) const {
    const int m = r - 1;
    std::span<int> tuple(t.data(), m);
    std::size_t rest = qb;
    for (int j = m - 1; j >= 0; --j) {
      int lo_b = j, hi_b = n_in_ + j - 1;
      while (lo_b < hi_b) {
        const int mid = (lo_b + hi_b + 1) / 2;
        if (tuples_.choose(mid, j + 1) <= rest)
          lo_b = mid;
        else
          hi_b = mid - 1;
      }
      rest -= tuples_.choose(lo_b, j + 1);
      tuple[j] = lo_b - j;
    }
    for (std::size_t q = qb; q < qe; ++q) {
      pa[0] = 0;
      for (int j = 0; j < m; ++j) pa[j + 1] = pa[j] + tuples_.choose(tuple[j] + j, j + 1);
      sb[m] = 0;
      for (int u = m - 1; u >= 0; --u) sb[u] = sb[u + 1] + tuples_.choose(tuple[u] + u + 1, u + 2);
      int pos = 0;
      for (int i1 = 0; i1 < n_in_; ++i1) {
        while (pos < m && tuple[pos] <= i1) ++pos;
        g[i1] = V[pa[pos] + tuples_.choose(i1 + pos, pos + 1) + sb[pos]];
      }
      for (int o = lo; o < hi; ++o) {
        const T* krow = K.m.data() + static_cast<std::size_t>(o) * n_in_;
        T acc{};
        for (int i1 = 0; i1 < n_in_; ++i1) acc += krow[i1] * g[i1];
        W[static_cast<std::size_t>(o - lo) * cnt + q] = acc;
      }
      if (m > 0) {
        // advance to next sorted tuple in rank order
        for (int j = 0; j < m; ++j) {
          const bool last = (j + 1 == m);
          if ((last && tuple[j] + 1 < n_in_) || (!last && tuple[j] < tuple[j + 1])) {
            ++tuple[j];
            for (int i = 0; i < j; ++i) tuple[i] = 0;
            break;
          }
        }
      }
    }
  }

  void descend(int level, const T* V, int r, int lo, std::size_t lead_flat, Workspace& ws,
               T* out) const {
    if (r == 0) {
      const std::size_t s = p_ < d_ ? out_tuples_.rank(ws.sym) : 0;
      out[lead_flat * sym_count_ + s] = V[0];
      return;
    }
    const AxisKernel<T>& K = kernel(level);
    const bool is_lead = level < p_;
    const int o_lo = is_lead ? 0 : lo;
    const std::size_t cnt = counts_[r - 1];
    T* W = ws.bufs[level].data();
    peel(V, r, K, o_lo, K.n_out, W, cnt, 0, cnt, ws.gather, ws.pa, ws.sb, ws.tuple);
    for (int o = o_lo; o < K.n_out; ++o) {
      const T* v = W + static_cast<std::size_t>(o - o_lo) * cnt;
      if (is_lead) {
        descend(level + 1, v, r - 1, 0, lead_flat * K.n_out + o, ws, out);
      } else {
        ws.sym.push_back(o);
        descend(level + 1, v, r - 1, o, lead_flat, ws, out);
        ws.sym.pop_back();
      }
    }
  }

  int n_in_, d_, p_;
  std::span<const AxisKernel<T>> lead_;
  const AxisKernel<T>& common_;
  SortedTuples tuples_;
  SortedTuples out_tuples_;
  std::vector<std::size_t> counts_;
  std::size_t sym_count_ = 1;
};

}  // namespace

std::size_t symmetric_output_size(int d, std::span<const int> lead_outputs, int common_outputs) {
  const int p = static_cast<int>(lead_outputs.size());
  std::size_t n = p < d ? binomial(common_outputs + (d - p) - 1, d - p) : 1;
  for (int m : lead_outputs) n *= static_cast<std::size_t>(m);
  return n;
}

template <class T>
std::vector<T> symmetric_transform(std::span<const T> in, int n_in, int d,
                                   std::span<const AxisKernel<T>> lead,
                                   const AxisKernel<T>& common) {
  if (d < 1) throw PreconditionError("symmetric_transform: dimension must be positive");
  if (static_cast<int>(lead.size()) > d) throw PreconditionError("too many lead axes");
  Engine<T> engine(n_in, d, lead, common);
  require_cells(static_cast<double>(engine.output_size()), "symmetric transform output");
  return engine.run(in);
}

template std::vector<double> symmetric_transform<double>(std::span<const double>, int, int,
                                                         std::span<const AxisKernel<double>>,
                                                         const AxisKernel<double>&);
template std::vector<std::complex<double>> symmetric_transform<std::complex<double>>(
    std::span<const std::complex<double>>, int, int,
    std::span<const AxisKernel<std::complex<double>>>, const AxisKernel<std::complex<double>>&);

}  // namespace latdeconv::detail
