#include <immintrin.h>

#include "isym/kernels.hpp"

namespace isym::kernels {
namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline double squared_distance_impl(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
        acc0 = _mm256_fmadd_pd(d0, d0, acc0);
        acc1 = _mm256_fmadd_pd(d1, d1, acc1);
    }
    for (; i + 4 <= n; i += 4) {
        const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc0 = _mm256_fmadd_pd(d0, d0, acc0);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

double squared_distance(const double* a, const double* b, std::size_t n) { return squared_distance_impl(a, b, n); }

void squared_distance_rows(const double* query, const double* rows, std::size_t row_count, std::size_t stride,
                           std::size_t n, double* out) {
    for (std::size_t r = 0; r < row_count; ++r) out[r] = squared_distance_impl(query, rows + r * stride, n);
}

void min_update(double* running, const double* candidate, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d r = _mm256_loadu_pd(running + i);
        const __m256d c = _mm256_loadu_pd(candidate + i);
        // min_pd(c, r) returns r when either is NaN, matching the scalar `c < r` test.
        _mm256_storeu_pd(running + i, _mm256_min_pd(c, r));
    }
    for (; i < n; ++i) {
        if (candidate[i] < running[i]) running[i] = candidate[i];
    }
}

}  // namespace

const KernelTable* avx2_table_impl() {
    static const KernelTable t{Isa::Avx2, &squared_distance, &squared_distance_rows, &min_update};
    return &t;
}

}  // namespace isym::kernels
