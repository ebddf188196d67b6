#include "latdeconv/orbits.hpp"

#include <limits>
#include <map>
#include <string>

#include "latdeconv/common.hpp"

namespace latdeconv {

std::uint64_t binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 r = 1;
  for (int i = 1; i <= k; ++i) {
    r = r * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
    if (r > std::numeric_limits<std::uint64_t>::max())
      throw PreconditionError("binomial coefficient C(" + std::to_string(n) + "," +
                              std::to_string(k) + ") overflows 64 bits");
  }
  return static_cast<std::uint64_t>(r);
}

SortedTuples::SortedTuples(int values, int length) : values_(values), length_(length) {
  if (values < 1 || length < 0) throw PreconditionError("SortedTuples needs values >= 1");
  const int rows = values + length + 1;
  table_.assign(static_cast<std::size_t>(rows) * (length + 2), 0);
  for (int n = 0; n < rows; ++n)
    for (int k = 0; k <= length + 1; ++k) {
      std::uint64_t v = 0;
      if (k == 0)
        v = 1;
      else if (n > 0)
        v = table_[static_cast<std::size_t>(n - 1) * (length + 2) + k - 1] +
            table_[static_cast<std::size_t>(n - 1) * (length + 2) + k];
      table_[static_cast<std::size_t>(n) * (length + 2) + k] = v;
    }
  size_ = static_cast<std::size_t>(binomial(values + length - 1, length));
}

void SortedTuples::unrank(std::size_t rank, std::span<int> out) const {
  for (int j = length_ - 1; j >= 0; --j) {
    // largest b with C(b, j+1) <= rank
    int lo = j, hi = values_ + j - 1;
    while (lo < hi) {
      const int mid = (lo + hi + 1) / 2;
      if (choose(mid, j + 1) <= rank)
        lo = mid;
      else
        hi = mid - 1;
    }
    rank -= choose(lo, j + 1);
    out[j] = lo - j;
  }
}

void SortedTuples::first(std::span<int> tuple) const {
  for (int j = 0; j < length_; ++j) tuple[j] = 0;
}

std::uint64_t permutation_count(std::span<const int> sorted) {
  std::uint64_t r = 1;
  int placed = 0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const int run = static_cast<int>(j - i);
    r *= binomial(placed + run, run);
    placed += run;
    i = j;
  }
  return r;
}

std::uint64_t orbit_size(std::span<const int> sorted_abs) {
  std::uint64_t r = permutation_count(sorted_abs);
  for (int v : sorted_abs)
    if (v != 0) r *= 2;
  return r;
}

}  // namespace latdeconv
