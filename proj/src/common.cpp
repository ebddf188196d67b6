#include "latdeconv/common.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <thread>

namespace latdeconv {
namespace {

std::mutex warning_mutex;
std::function<void(std::string_view)>& warning_handler() {
  static std::function<void(std::string_view)> handler = [](std::string_view msg) {
    std::cerr << "latdeconv warning: " << msg << '\n';
  };
  return handler;
}

thread_local int mute_depth = 0;

std::atomic<std::size_t> cap{std::size_t{1} << 29};

int default_threads() {
  if (const char* env = std::getenv("LATDECONV_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::atomic<int> threads{0};

}  // namespace

void warn(std::string_view message) {
  if (mute_depth > 0) return;
  std::lock_guard<std::mutex> lock(warning_mutex);
  if (warning_handler()) warning_handler()(message);
}

void set_warning_handler(std::function<void(std::string_view)> handler) {
  std::lock_guard<std::mutex> lock(warning_mutex);
  warning_handler() = std::move(handler);
}

WarningMute::WarningMute() { ++mute_depth; }
WarningMute::~WarningMute() { --mute_depth; }

std::size_t cell_cap() { return cap.load(); }
void set_cell_cap(std::size_t cells) { cap.store(cells); }

void require_cells(double cells, std::string_view what) {
  if (cells > static_cast<double>(cap.load()))
  {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", cells);
    throw PreconditionError(std::string(what) + " needs " + buf + " cells, above the cap of " +
                            std::to_string(cap.load()) + " (raise it with --cell-cap)");
  }
}

int thread_count() {
  int n = threads.load();
  if (n <= 0) {
    n = default_threads();
    threads.store(n);
  }
  return n;
}

void set_thread_count(int n) { threads.store(n > 0 ? n : default_threads()); }

}  // namespace latdeconv
