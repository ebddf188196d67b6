#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace latdeconv {

/// Raised when an input violates a documented precondition (CLI exit code 2).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a computed quantity breaks an identity it must satisfy (CLI exit code 1).
class InvariantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void warn(std::string_view message);
void set_warning_handler(std::function<void(std::string_view)> handler);

/// Silences warn() on the current thread while alive.
class WarningMute {
 public:
  WarningMute();
  ~WarningMute();
  WarningMute(const WarningMute&) = delete;
  WarningMute& operator=(const WarningMute&) = delete;
};

/// Upper bound on the number of stored cells any single field or lattice array may use.
std::size_t cell_cap();
void set_cell_cap(std::size_t cells);
void require_cells(double cells, std::string_view what);

/// Threads used by parallel kernels; results never depend on this value.
int thread_count();
void set_thread_count(int threads);

}  // namespace latdeconv
