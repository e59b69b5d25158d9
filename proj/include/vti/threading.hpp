#pragma once

#include <string>
#include <thread>

#include <sched.h>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "vti/error.hpp"

namespace vti {

// Thread placement across logical CPUs. compact fills neighbouring CPUs
// first; scatter spreads workers evenly over the whole range.
enum class Placement { none, compact, scatter };

inline const char* to_string(Placement p) {
  switch (p) {
    case Placement::compact: return "compact";
    case Placement::scatter: return "scatter";
    default: return "none";
  }
}

inline Placement parse_placement(const std::string& s) {
  if (s == "none") return Placement::none;
  if (s == "compact") return Placement::compact;
  if (s == "scatter") return Placement::scatter;
  throw ParameterError("unknown placement '" + s + "' (expected none|compact|scatter)");
}

inline int hardware_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

// CPU assigned to worker `tid` of `nthreads`.
inline int placement_cpu(Placement p, int tid, int nthreads, int ncpu) {
  if (p == Placement::scatter && nthreads > 0 && nthreads < ncpu) {
    return static_cast<int>((static_cast<long>(tid) * ncpu) / nthreads) % ncpu;
  }
  return tid % ncpu;
}

// Pin the OpenMP worker pool. The runtime reuses its workers, so the
// affinity sticks for later parallel regions of the same size.
inline void apply_placement(Placement p, int nthreads) {
  if (p == Placement::none) return;
  const int ncpu = hardware_threads();
#pragma omp parallel num_threads(nthreads)
  {
    int tid = 0;
#ifdef _OPENMP
    tid = omp_get_thread_num();
#endif
    cpu_set_t set;
    CPU_ZERO(&set);
    CPU_SET(placement_cpu(p, tid, nthreads, ncpu), &set);
    sched_setaffinity(0, sizeof(set), &set);
  }
}

}  // namespace vti
