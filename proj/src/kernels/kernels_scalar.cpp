#include "isym/kernels.hpp"

namespace isym::kernels {
namespace {

double squared_distance(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

void squared_distance_rows(const double* query, const double* rows, std::size_t row_count, std::size_t stride,
                           std::size_t n, double* out) {
    for (std::size_t r = 0; r < row_count; ++r) out[r] = squared_distance(query, rows + r * stride, n);
}

void min_update(double* running, const double* candidate, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        if (candidate[i] < running[i]) running[i] = candidate[i];
    }
}

}  // namespace

const KernelTable& scalar_table() {
    static const KernelTable t{Isa::Scalar, &squared_distance, &squared_distance_rows, &min_update};
    return t;
}

}  // namespace isym::kernels
