#pragma once

// Separable transforms of hyperoctahedrally symmetric arrays.
//
// Input: values v(i) over sorted d-tuples of [0, n_in), stored in
// SortedTuples rank order. Output:
//   out(o) = sum_i prod_j K_j[o_j][i_j] v(sort(i))
// where the first p axes use their own kernels (dense outputs, axis 0
// slowest) and the trailing d-p axes share one kernel whose outputs are
// again stored as sorted tuples. Each axis is peeled off in turn: for every
// sorted (r-1)-tuple i' the values v(sort(i1 u i')) are gathered for all i1
// and contracted against the kernel.

#include <complex>
#include <span>
#include <vector>

namespace latdeconv::detail {

template <class T>
struct AxisKernel {
  int n_out = 0;
  int n_in = 0;
  std::vector<T> m;  // row-major n_out x n_in
  T operator()(int o, int i) const { return m[static_cast<std::size_t>(o) * n_in + i]; }
};

template <class T>
std::vector<T> symmetric_transform(std::span<const T> in, int n_in, int d,
                                   std::span<const AxisKernel<T>> lead,
                                   const AxisKernel<T>& common);

/// Output length of symmetric_transform.
std::size_t symmetric_output_size(int d, std::span<const int> lead_outputs, int common_outputs);

extern template std::vector<double> symmetric_transform<double>(
    std::span<const double>, int, int, std::span<const AxisKernel<double>>,
    const AxisKernel<double>&);
extern template std::vector<std::complex<double>> symmetric_transform<std::complex<double>>(
    std::span<const std::complex<double>>, int, int,
    std::span<const AxisKernel<std::complex<double>>>, const AxisKernel<std::complex<double>>&);

}  // namespace latdeconv::detail
