#pragma once

#include <cstddef>

#ifdef STFEM_HAVE_OPENMP
#include <omp.h>
#endif

namespace stfem {

/// Execution mode for the cell-parallel kernels. Serial is the reference
/// path and the default; OpenMP runs the same per-cell lambdas with results
/// staged per cell and merged in cell-id order, so outputs are bit-identical.
enum class ExecMode { Serial, OpenMP };

template <class F>
void for_each_index(ExecMode mode, std::ptrdiff_t n, F&& body) {
#ifdef STFEM_HAVE_OPENMP
    if (mode == ExecMode::OpenMP) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
        return;
    }
#else
    (void)mode;
#endif
    for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
}

inline int max_threads(ExecMode mode) {
#ifdef STFEM_HAVE_OPENMP
    if (mode == ExecMode::OpenMP) return omp_get_max_threads();
#else
    (void)mode;
#endif
    return 1;
}

} // namespace stfem
