// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <cstddef>

namespace gmvae::par {

namespace detail {
inline std::atomic<bool>& enabled_flag() {
  static std::atomic<bool> flag{true};
  return flag;
}
}  // namespace detail

/// Global switch between the OpenMP kernels and the serial reference path.
/// Both paths produce bit-identical results; the switch exists so tests can
/// pin the reference implementation and benchmarks can compare the two.
inline bool enabled() { return detail::enabled_flag().load(std::memory_order_relaxed); }
inline void set_enabled(bool on) { detail::enabled_flag().store(on, std::memory_order_relaxed); }

/// RAII scope for temporarily forcing serial execution.
struct SerialScope {
  SerialScope() : prev_(enabled()) { set_enabled(false); }
  ~SerialScope() { set_enabled(prev_); }
  bool prev_;
};

/// Index-parallel loop. The body must write only to slots owned by its
/// index; reductions over the slots happen afterwards in index order, so
/// results do not depend on the schedule or thread count.
template <typename F>
void for_each_index(std::size_t n, F&& body) {
#ifdef _OPENMP
  if (enabled() && n > 1) {
#pragma omp parallel for schedule(dynamic, 1)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      body(static_cast<std::size_t>(i));
    }
    return;
  }
#endif
  for (std::size_t i = 0; i < n; ++i) body(i);
}

}  // namespace gmvae::par
