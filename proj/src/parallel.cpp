// SPDX-License-Identifier: Apache-2.0

#include "bmti/parallel.hpp"

#include <omp.h>

namespace bmti {

int max_threads() { return omp_get_max_threads(); }

int thread_index(Exec exec) { return exec == Exec::serial ? 0 : omp_get_thread_num(); }

}  // namespace bmti
