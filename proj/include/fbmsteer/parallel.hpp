#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fbmsteer {

/// Execution policy for the data-parallel kernels. Every parallel kernel has
/// a serial twin that produces bit-identical output; tests and the benchmark
/// tool compare the two.
enum class Exec { serial, parallel };

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

/// Runs fn(i) for i in [0, count). Work items must write disjoint outputs;
/// iteration order must not affect the result.
template <class Fn>
void for_each_index(Exec exec, std::size_t count, Fn&& fn) {
  if (exec == Exec::parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
    for (long long i = 0; i < static_cast<long long>(count); ++i) {
      fn(static_cast<std::size_t>(i));
    }
    return;
#endif
  }
  for (std::size_t i = 0; i < count; ++i) fn(i);
}

}  // namespace fbmsteer
