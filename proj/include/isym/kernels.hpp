#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

// Data-parallel inner loops of the distance computations. Every kernel has a
// scalar reference implementation and, where the target supports it, an
// AVX2+FMA (x86-64) or NEON (aarch64) variant. The variant is selected once
// at runtime; ISYM_KERNEL=scalar|avx2|neon forces one.
namespace isym::kernels {

enum class Isa { Scalar, Avx2, Neon };

struct KernelTable {
    Isa isa;
    /// sum_i (a[i] - b[i])^2
    double (*squared_distance)(const double* a, const double* b, std::size_t n);
    /// out[r] = squared_distance(query, rows + r * stride, n) for r < row_count
    void (*squared_distance_rows)(const double* query, const double* rows, std::size_t row_count,
                                  std::size_t stride, std::size_t n, double* out);
    /// running[i] = min(running[i], candidate[i])
    void (*min_update)(double* running, const double* candidate, std::size_t n);
};

const KernelTable& scalar_table();
/// nullptr when the variant is not compiled in or the CPU lacks it.
const KernelTable* avx2_table();
const KernelTable* neon_table();

bool available(Isa isa);
const KernelTable& table(Isa isa);  // throws InvalidArgument if unavailable

/// Process-wide selection; defaults to the best available variant.
const KernelTable& active();
void select(Isa isa);

std::string_view to_string(Isa isa);
std::optional<Isa> parse_isa(std::string_view name);

}  // namespace isym::kernels
