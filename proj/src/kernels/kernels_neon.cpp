#include <arm_neon.h>

#include "isym/kernels.hpp"

namespace isym::kernels {
namespace {

inline double squared_distance_impl(const double* a, const double* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const float64x2_t d0 = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
        const float64x2_t d1 = vsubq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
        acc0 = vfmaq_f64(acc0, d0, d0);
        acc1 = vfmaq_f64(acc1, d1, d1);
    }
    double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
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
    for (; i + 2 <= n; i += 2) {
        const float64x2_t r = vld1q_f64(running + i);
        const float64x2_t c = vld1q_f64(candidate + i);
        vst1q_f64(running + i, vbslq_f64(vcltq_f64(c, r), c, r));
    }
    for (; i < n; ++i) {
        if (candidate[i] < running[i]) running[i] = candidate[i];
    }
}

}  // namespace

const KernelTable* neon_table_impl() {
    static const KernelTable t{Isa::Neon, &squared_distance, &squared_distance_rows, &min_update};
    return &t;
}

}  // namespace isym::kernels
