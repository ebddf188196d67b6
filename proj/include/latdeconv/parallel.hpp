#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "latdeconv/common.hpp"

namespace latdeconv {

/// Neumaier-compensated summation.
class KahanSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  KahanSum& operator+=(double x) {
    add(x);
    return *this;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Runs body(begin, end) over contiguous blocks of [0, n). Each index is
/// handled by exactly one call, so writes to per-index outputs are
/// deterministic regardless of the thread count.
template <class Body>
void parallel_for(std::size_t n, Body&& body, std::size_t min_block = 1) {
  if (n == 0) return;
  const std::size_t threads =
      std::min<std::size_t>(static_cast<std::size_t>(thread_count()),
                            std::max<std::size_t>(1, n / std::max<std::size_t>(1, min_block)));
  if (threads <= 1) {
    body(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const std::size_t block = (n + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t begin = t * block;
    const std::size_t end = std::min(n, begin + block);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

/// Sum of term(i) for i in [0, n). Chunk boundaries are fixed, so the
/// rounding pattern is the same for every thread count.
template <class Term>
double deterministic_sum(std::size_t n, Term&& term) {
  constexpr std::size_t chunk = 4096;
  const std::size_t chunks = (n + chunk - 1) / chunk;
  std::vector<double> partial(chunks, 0.0);
  parallel_for(chunks, [&](std::size_t b, std::size_t e) {
    for (std::size_t c = b; c < e; ++c) {
      KahanSum s;
      const std::size_t hi = std::min(n, (c + 1) * chunk);
      for (std::size_t i = c * chunk; i < hi; ++i) s.add(term(i));
      partial[c] = s.value();
    }
  });
  KahanSum total;
  for (double p : partial) total.add(p);
  return total.value();
}

/// Maximum of term(i) over [0, n); returns 0 for n == 0.
template <class Term>
double deterministic_max(std::size_t n, Term&& term) {
  constexpr std::size_t chunk = 4096;
  const std::size_t chunks = (n + chunk - 1) / chunk;
  std::vector<double> partial(chunks, 0.0);
  parallel_for(chunks, [&](std::size_t b, std::size_t e) {
    for (std::size_t c = b; c < e; ++c) {
      double m = 0.0;
      const std::size_t hi = std::min(n, (c + 1) * chunk);
      for (std::size_t i = c * chunk; i < hi; ++i) m = std::max(m, term(i));
      partial[c] = m;
    }
  });
  double m = 0.0;
  for (double p : partial) m = std::max(m, p);
  return m;
}

}  // namespace latdeconv
