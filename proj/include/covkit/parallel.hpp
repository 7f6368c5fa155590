// Deterministic parallel helpers for the integration and sampling loops.
//
// Work is split into tasks with fixed boundaries; each task writes only its
// own slot, and slot results are combined by fixed-order pairwise reduction.
// The combined result is therefore bit-identical for any thread count, which
// is what lets the determinism contract hold without a special code path.
#pragma once

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "errors.hpp"

namespace covkit {

// Worker count: explicit request > COVKIT_THREADS > hardware concurrency.
inline int resolve_thread_count(int requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("COVKIT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1 || v > 4096) {
      throw ConfigInvalid("COVKIT_THREADS must be a positive integer (got \"" +
                          std::string(env) + "\")");
    }
    return static_cast<int>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

// Run fn(task) for task in [0, n_tasks) on up to `threads` workers. fn must
// only touch state owned by its task index.
template <typename Fn>
void parallel_for(std::size_t n_tasks, int threads, Fn&& fn) {
  const int n_workers = std::min<std::size_t>(std::max(threads, 1), n_tasks ? n_tasks : 1);
  if (n_workers <= 1 || n_tasks <= 1) {
    for (std::size_t t = 0; t < n_tasks; ++t) fn(t);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (int w = 0; w < n_workers; ++w) {
    pool.emplace_back([&fn, w, n_workers, n_tasks] {
      for (std::size_t t = static_cast<std::size_t>(w); t < n_tasks;
           t += static_cast<std::size_t>(n_workers)) {
        fn(t);
      }
    });
  }
  for (auto& th : pool) th.join();
}

// Compensated (Kahan) accumulator: fixed-order, high-accuracy partial sums.
struct KahanSum {
  double sum{0};
  double carry{0};

  void add(double v) {
    const double y = v - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }

  double value() const { return sum; }
};

// Fixed-order pairwise reduction of task partials.
inline double pairwise_sum(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::size_t n = v.size();
  while (n > 1) {
    const std::size_t half = n / 2;
    for (std::size_t i = 0; i < half; ++i) v[i] = v[2 * i] + v[2 * i + 1];
    if (n % 2) v[half] = v[n - 1];
    n = half + n % 2;
  }
  return v[0];
}

}  // namespace covkit
