#pragma once

#include <complex>
#include <functional>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include "latdeconv/lattice.hpp"

namespace latdeconv {

using cplx = std::complex<double>;

/// Uniform grid on (-pi, pi]^d with M nodes per axis. Node indices are in
/// FFT order: index i < M/2 is the nonnegative frequency i, index i >= M/2
/// wraps to i - M. Shifted grids move every node by half a cell, so no
/// coordinate is ever 0.
class TorusGrid {
 public:
  TorusGrid() = default;
  TorusGrid(int dim, int points, bool shifted);

  int dim() const { return dim_; }
  int points() const { return points_; }
  bool shifted() const { return shifted_; }
  double spacing() const;

  /// Coordinate of node index i in (-pi, pi].
  double node(int i) const;
  /// Nonnegative node set |k|: M/2 nodes when shifted, M/2 + 1 otherwise.
  int half_count() const { return shifted_ ? points_ / 2 : points_ / 2 + 1; }
  double half_node(int h) const;
  /// Half-node index of |node(i)|.
  int half_index(int i) const;
  /// 1 for the self-paired nodes 0 and pi, else 2.
  int half_weight(int h) const;

  double total_nodes() const;

 private:
  int dim_ = 0;
  int points_ = 0;
  bool shifted_ = true;
};

enum class FieldLayout {
  dense,    ///< every node, FFT order per axis, last axis fastest
  reduced,  ///< first p axes dense, trailing axes as sorted half-node tuples
};

/// Complex samples on a TorusGrid. The reduced layout represents a field
/// invariant under sign flips and permutations of the trailing d-p axes.
class SpectralField {
 public:
  SpectralField() = default;
  static SpectralField dense(const TorusGrid& grid);
  static SpectralField reduced(const TorusGrid& grid, int lead_axes);

  const TorusGrid& grid() const { return grid_; }
  FieldLayout layout() const { return layout_; }
  int lead_axes() const { return lead_; }
  std::size_t size() const { return values_.size(); }
  std::span<const cplx> values() const { return values_; }
  std::span<cplx> values() { return values_; }

  /// Value at a node given by FFT-order indices on every axis.
  cplx at(std::span<const int> node_index) const;

  /// Node coordinates of storage entry i (reduced: trailing axes as |k|).
  void node_of(std::size_t i, std::span<double> k) const;
  /// Number of grid nodes represented by storage entry i.
  double multiplicity(std::size_t i) const;
  std::vector<double> multiplicities() const;

  double max_abs() const;
  double max_imag() const;

  SpectralField to_dense() const;
  /// Re-layout with more dense lead axes.
  SpectralField with_lead_axes(int p) const;

  /// Nodewise 1/v; throws PreconditionError naming the node if |v| < guard.
  SpectralField reciprocal(double guard = 1e-13) const;

  SpectralField& operator*=(cplx c);
  friend SpectralField operator+(const SpectralField& a, const SpectralField& b);
  friend SpectralField operator-(const SpectralField& a, const SpectralField& b);
  friend SpectralField operator*(const SpectralField& a, const SpectralField& b);
  friend SpectralField operator/(const SpectralField& a, const SpectralField& b);
  friend SpectralField operator*(cplx c, const SpectralField& a);

 private:
  static SpectralField binary(const SpectralField& a, const SpectralField& b,
                              const std::function<cplx(cplx, cplx)>& op);
  void storage_position(std::size_t i, std::span<int> lead, std::span<int> trailing) const;

  TorusGrid grid_;
  FieldLayout layout_ = FieldLayout::dense;
  int lead_ = 0;
  std::vector<cplx> values_;
  std::size_t trailing_count_ = 1;
  SortedTuples trailing_index_;
};

enum class TransformPath {
  automatic,  ///< orbit input: symmetric engine; box input: FFT when M >= 2R+1, else direct
  fft,
  direct,
};

/// Samples f^(k) = sum_x f(x) e^{i k.x} at every node.
SpectralField forward_transform(const LatticeFunction& f, const TorusGrid& grid,
                                TransformPath path = TransformPath::automatic);

/// Transform of (ix)^alpha f(x), i.e. the exact derivative nabla^alpha f^.
/// For orbit input the nonzero orders must occupy a prefix of the axes; the
/// result keeps at least min_lead_axes dense axes.
SpectralField spectral_derivative(const LatticeFunction& f, const MultiIndex& alpha,
                                  const TorusGrid& grid,
                                  TransformPath path = TransformPath::automatic,
                                  int min_lead_axes = 0);

/// (M^{-d} sum |v|^p)^{1/p}; p = infinity gives the max modulus.
double lp_norm(const SpectralField& field, double p);

struct InfraredReport {
  double K2_est = 0.0;
  std::vector<double> argmin_node;
  double f_hat_zero = 0.0;
  bool holds() const { return K2_est > 0.0 && f_hat_zero >= 0.0; }
};

InfraredReport infrared_check(const LatticeFunction& f, const TorusGrid& grid);

/// M^{-d} sum_k e^{-ik.x} v(k) for x in [-R, R]^d, with v the field or its
/// reciprocal. Reduced fields with no lead axes come back in orbit layout.
LatticeFunction inverse_on_box(const SpectralField& field, int radius, bool reciprocal);

void write_csv(const SpectralField& field, std::ostream& out);

}  // namespace latdeconv
