#pragma once

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lmce {

// Sample sweeps come in two flavours: an OpenMP-parallel kernel and a serial
// reference used by the tests and the benchmark. Results are written into
// per-index slots and reduced serially afterwards, so both paths produce
// identical output.
enum class Exec { Serial, Parallel };

int max_threads();
void set_thread_count(int n);  // no-op without OpenMP

template <typename Fn>
void for_each_index(int count, Exec exec, Fn&& fn) {
    if (exec == Exec::Parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
        for (int i = 0; i < count; ++i) fn(i);
        return;
#endif
    }
    for (int i = 0; i < count; ++i) fn(i);
}

}  // namespace lmce
