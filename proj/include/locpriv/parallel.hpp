#pragma once

#ifdef _OPENMP
#include <omp.h>
#endif

namespace locpriv {

inline int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

inline void set_max_threads(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

// 0 means "use the OpenMP default".
inline int resolve_threads(int requested) {
    return requested > 0 ? requested : max_threads();
}

}  // namespace locpriv
