// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <exception>
#include <mutex>
#include <utility>

namespace bmti {

/// Selects the serial reference loop or the OpenMP loop for a kernel.
///
/// Both paths run the same per-index body and write to disjoint outputs, so
/// their results are bitwise identical. The serial path is what the tests
/// compare against and what the benchmarks use as the baseline.
enum class Exec { serial, parallel };

int max_threads();

/// OpenMP thread number inside a parallel loop, 0 for serial execution.
int thread_index(Exec exec);

/// Runs `body(i)` for i in [0, n). Exceptions thrown by the body are captured
/// and the first one is rethrown on the calling thread.
template <class Body>
void for_each_index(std::size_t n, Exec exec, Body&& body) {
  if (exec == Exec::serial) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 32)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace bmti
