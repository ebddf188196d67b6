#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace latdeconv {

/// Indexes nondecreasing tuples (a_0 <= ... <= a_{m-1}) with entries in
/// [0, values) by their colexicographic rank, using the combinatorial number
/// system on b_j = a_j + j.
class SortedTuples {
 public:
  SortedTuples() = default;
  SortedTuples(int values, int length);

  int values() const { return values_; }
  int length() const { return length_; }
  std::size_t size() const { return size_; }

  /// C(n, k) from the internal table; n < values + length + 1, k <= length + 1.
  std::uint64_t choose(int n, int k) const {
    return table_[static_cast<std::size_t>(n) * (length_ + 2) + k];
  }

  std::size_t rank(std::span<const int> tuple) const {
    std::size_t r = 0;
    for (int j = 0; j < length_; ++j) r += choose(tuple[j] + j, j + 1);
    return r;
  }

  void unrank(std::size_t rank, std::span<int> out) const;

  void first(std::span<int> tuple) const;
  /// Advances to the tuple of the next rank; false after the last one.
  bool next(std::span<int> tuple) const {
    for (int j = 0; j < length_; ++j) {
      const bool last = (j + 1 == length_);
      if ((last && tuple[j] + 1 < values_) || (!last && tuple[j] < tuple[j + 1])) {
        ++tuple[j];
        for (int i = 0; i < j; ++i) tuple[i] = 0;
        return true;
      }
    }
    return false;
  }

 private:
  int values_ = 0;
  int length_ = 0;
  std::size_t size_ = 0;
  std::vector<std::uint64_t> table_;
};

/// Exact binomial coefficient; throws on 64-bit overflow.
std::uint64_t binomial(int n, int k);

/// Number of distinct orderings of a sorted tuple (multinomial).
std::uint64_t permutation_count(std::span<const int> sorted);

/// Size of the signed-permutation orbit of a point whose sorted absolute
/// coordinates are given.
std::uint64_t orbit_size(std::span<const int> sorted_abs);

/// Calls fn(point) for every distinct signed permutation of a sorted
/// nonnegative tuple.
template <class Fn>
void for_each_orbit_point(std::span<const int> sorted_abs, Fn&& fn);

/// Restores nondecreasing order after t[pos] was changed.
inline void resort_at(std::span<int> t, int pos) {
  int v = t[pos];
  int i = pos;
  while (i > 0 && t[i - 1] > v) {
    t[i] = t[i - 1];
    --i;
  }
  while (i + 1 < static_cast<int>(t.size()) && t[i + 1] < v) {
    t[i] = t[i + 1];
    ++i;
  }
  t[i] = v;
}

}  // namespace latdeconv

#include <algorithm>

namespace latdeconv {

template <class Fn>
void for_each_orbit_point(std::span<const int> sorted_abs, Fn&& fn) {
  std::vector<int> perm(sorted_abs.begin(), sorted_abs.end());
  std::vector<int> point(perm.size());
  std::vector<int> nonzero;
  do {
    nonzero.clear();
    for (std::size_t i = 0; i < perm.size(); ++i)
      if (perm[i] != 0) nonzero.push_back(static_cast<int>(i));
    const std::uint64_t masks = std::uint64_t{1} << nonzero.size();
    for (std::uint64_t mask = 0; mask < masks; ++mask) {
      point = perm;
      for (std::size_t b = 0; b < nonzero.size(); ++b)
        if (mask >> b & 1U) point[nonzero[b]] = -point[nonzero[b]];
      fn(std::span<const int>(point));
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
}

}  // namespace latdeconv
