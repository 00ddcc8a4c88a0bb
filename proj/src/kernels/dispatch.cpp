#include <atomic>
#include <cstdlib>

#include "isym/error.hpp"
#include "isym/kernels.hpp"

namespace isym::kernels {

#if defined(ISYM_HAVE_AVX2)
const KernelTable* avx2_table_impl();
#endif
#if defined(ISYM_HAVE_NEON)
const KernelTable* neon_table_impl();
#endif

const KernelTable* avx2_table() {
#if defined(ISYM_HAVE_AVX2)
    static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return supported ? avx2_table_impl() : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable* neon_table() {
#if defined(ISYM_HAVE_NEON)
    return neon_table_impl();  // baseline on aarch64
#else
    return nullptr;
#endif
}

bool available(Isa isa) {
    switch (isa) {
        case Isa::Scalar: return true;
        case Isa::Avx2: return avx2_table() != nullptr;
        case Isa::Neon: return neon_table() != nullptr;
    }
    return false;
}

const KernelTable& table(Isa isa) {
    switch (isa) {
        case Isa::Scalar: return scalar_table();
        case Isa::Avx2:
            if (const auto* t = avx2_table()) return *t;
            break;
        case Isa::Neon:
            if (const auto* t = neon_table()) return *t;
            break;
    }
    throw Error(ErrorCode::InvalidArgument, std::string("kernel variant '") + std::string(to_string(isa)) +
                                                "' is not available on this machine");
}

namespace {

const KernelTable* initial_selection() {
    if (const char* env = std::getenv("ISYM_KERNEL")) {
        if (auto isa = parse_isa(env); isa && available(*isa)) return &table(*isa);
    }
    if (const auto* t = avx2_table()) return t;
    if (const auto* t = neon_table()) return t;
    return &scalar_table();
}

std::atomic<const KernelTable*>& current() {
    static std::atomic<const KernelTable*> selected{initial_selection()};
    return selected;
}

}  // namespace

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

void select(Isa isa) { current().store(&table(isa), std::memory_order_release); }

std::string_view to_string(Isa isa) {
    switch (isa) {
        case Isa::Scalar: return "scalar";
        case Isa::Avx2: return "avx2";
        case Isa::Neon: return "neon";
    }
    return "unknown";
}

std::optional<Isa> parse_isa(std::string_view name) {
    if (name == "scalar") return Isa::Scalar;
    if (name == "avx2") return Isa::Avx2;
    if (name == "neon") return Isa::Neon;
    return std::nullopt;
}

}  // namespace isym::kernels
