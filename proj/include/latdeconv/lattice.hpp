#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "latdeconv/orbits.hpp"

namespace latdeconv {

struct LatticePoint {
  std::vector<int> coords;

  int dim() const { return static_cast<int>(coords.size()); }
  long long norm_squared() const {
    long long s = 0;
    for (int c : coords) s += static_cast<long long>(c) * c;
    return s;
  }
  double norm() const { return std::sqrt(static_cast<double>(norm_squared())); }
  /// max(|x|, 1)
  double floor_norm() const { return std::max(norm(), 1.0); }
};

struct MultiIndex {
  std::vector<int> orders;

  int dim() const { return static_cast<int>(orders.size()); }
  int order() const {
    int s = 0;
    for (int a : orders) s += a;
    return s;
  }
  bool is_zero() const { return order() == 0; }
  static MultiIndex zero(int d) { return {std::vector<int>(d, 0)}; }
  static MultiIndex axis(int d, int axis, int order) {
    MultiIndex m = zero(d);
    m.orders.at(axis) = order;
    return m;
  }
};

enum class Layout {
  box,     ///< every point of [-R, R]^d, lexicographic, last coordinate fastest
  orbits,  ///< one value per hyperoctahedral orbit, indexed by sorted |x|
};

enum class SymmetryTag { none, declared, verified };

std::string to_string(SymmetryTag tag);
SymmetryTag symmetry_tag_from_string(const std::string& s);

/// Box-truncated real function on Z^d. Values outside [-R, R]^d are zero.
class LatticeFunction {
 public:
  LatticeFunction() = default;

  static LatticeFunction zeros(int dim, int radius, Layout layout = Layout::box);
  /// Kronecker delta at the origin.
  static LatticeFunction delta(int dim, Layout layout = Layout::orbits);
  /// Nearest-neighbour step distribution D(x) = 1/(2d) for |x| = 1.
  static LatticeFunction nearest_neighbour(int dim, Layout layout = Layout::orbits);
  /// fn is evaluated at every box point (box layout) or at every sorted
  /// nonnegative orbit representative (orbit layout).
  static LatticeFunction from_function(int dim, int radius, Layout layout,
                                       const std::function<double(std::span<const int>)>& fn);

  int dim() const { return dim_; }
  int radius() const { return radius_; }
  Layout layout() const { return layout_; }
  SymmetryTag symmetry_tag() const { return tag_; }
  void set_symmetry_tag(SymmetryTag tag);

  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  /// Mutable access drops a verified tag on box layout.
  std::span<double> mutable_values();

  double operator()(std::span<const int> x) const;
  double at(std::initializer_list<int> x) const {
    return (*this)(std::span<const int>(x.begin(), x.size()));
  }
  /// Box layout: sets one point. Orbit layout: sets the whole orbit of x.
  void set(std::span<const int> x, double value);
  void set(std::initializer_list<int> x, double value) {
    set(std::span<const int>(x.begin(), x.size()), value);
  }

  /// Storage index of a point inside the box, or npos.
  std::size_t index_of(std::span<const int> x) const;
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  /// fn(point, weight, value) per stored entry; weight is the number of
  /// lattice points represented (1 for box layout, the orbit size otherwise).
  /// Iteration order is the storage order.
  template <class Fn>
  void for_each(Fn&& fn) const;

  /// Point of storage entry i (orbit layout: the sorted representative).
  void point_of(std::size_t i, std::span<int> out) const;
  double weight_of(std::size_t i) const;

  const SortedTuples& orbit_index() const { return orbit_index_; }

  LatticeFunction to_box() const;
  /// Throws PreconditionError unless f is exactly symmetric.
  LatticeFunction to_orbits() const;
  /// Same function on a different box; entries outside the new box are dropped.
  LatticeFunction resized(int radius) const;

  double sup_norm() const;

  LatticeFunction& operator*=(double c);
  friend LatticeFunction operator+(const LatticeFunction& a, const LatticeFunction& b);
  friend LatticeFunction operator-(const LatticeFunction& a, const LatticeFunction& b);
  friend LatticeFunction operator*(double c, const LatticeFunction& f);

 private:
  LatticeFunction(int dim, int radius, Layout layout);
  static LatticeFunction combine(const LatticeFunction& a, const LatticeFunction& b, double sb);

  int dim_ = 0;
  int radius_ = 0;
  Layout layout_ = Layout::box;
  SymmetryTag tag_ = SymmetryTag::none;
  std::vector<double> values_;
  SortedTuples orbit_index_;
};

/// Signed permutation: (g x)_i = sign[i] * x[perm[i]].
struct HyperoctahedralElement {
  std::vector<int> perm;
  std::vector<int> sign;
  std::string describe() const;
};

struct SymmetryReport {
  bool symmetric = true;
  std::optional<LatticePoint> witness_point;
  std::optional<HyperoctahedralElement> witness_element;
};

/// Exact invariance under the hyperoctahedral group, tested on its generators
/// (the d reflections and the d-1 adjacent transpositions).
SymmetryReport check_symmetry(const LatticeFunction& f);
/// Group average, returned in orbit layout.
LatticeFunction symmetrize(const LatticeFunction& f);

double moment(const LatticeFunction& f, double power, bool absolute = false);
LatticeFunction convolve(const LatticeFunction& f, const LatticeFunction& g);
LatticeFunction apply_monomial(const LatticeFunction& f, const MultiIndex& alpha);

struct DecayEnvelope {
  double K = 0.0;
  double b = 0.0;
  double r_min = 0.0;
  double r_max = 0.0;
  double max_violation = 0.0;
  bool zero_window = false;
  bool holds() const { return max_violation <= 0.0; }
};

DecayEnvelope fit_envelope(const LatticeFunction& f, double r_min, double r_max);

// Serialization: JSON header plus little-endian float64 values.
void write_lattice_function(const LatticeFunction& f, const std::string& json_path,
                            bool inline_base64);
LatticeFunction read_lattice_function(const std::string& json_path);
void write_csv(const LatticeFunction& f, std::ostream& out);

// ---------------------------------------------------------------------------

template <class Fn>
void LatticeFunction::for_each(Fn&& fn) const {
  std::vector<int> x(dim_);
  if (layout_ == Layout::box) {
    for (int j = 0; j < dim_; ++j) x[j] = -radius_;
    for (std::size_t i = 0; i < values_.size(); ++i) {
      fn(std::span<const int>(x), 1.0, values_[i]);
      for (int j = dim_ - 1; j >= 0; --j) {
        if (++x[j] <= radius_) break;
        x[j] = -radius_;
      }
    }
  } else {
    orbit_index_.first(x);
    for (std::size_t i = 0; i < values_.size(); ++i) {
      fn(std::span<const int>(x), static_cast<double>(orbit_size(x)), values_[i]);
      orbit_index_.next(x);
    }
  }
}

}  // namespace latdeconv
