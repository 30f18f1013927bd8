#pragma once

#ifdef _OPENMP
#include <omp.h>
#endif

namespace emrseg {

// Execution knobs shared by every kernel that has both a serial reference
// path and an OpenMP path. deterministic selects the ordered/serial update
// strategy where the parallel one would reorder floating-point work
// (skip-gram hogwild); kernels whose parallel form is already bit-equal to
// the serial reference (independent work + ordered reduction) ignore it.
struct RunContext {
    int threads = 0;           // 0 = OpenMP default
    bool deterministic = true; // test contract: fixed seed => identical bytes
};

inline int effective_threads(const RunContext& ctx) {
#ifdef _OPENMP
    return ctx.threads > 0 ? ctx.threads : omp_get_max_threads();
#else
    (void)ctx;
    return 1;
#endif
}

}  // namespace emrseg
