#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "isym/kernels.hpp"

using namespace isym::kernels;

namespace {

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::vector<double> v(n);
    for (double& x : v) x = u(rng);
    return v;
}

// Plain loop, independent of the scalar table.
double oracle_sq(const double* a, const double* b, std::size_t n) {
    long double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += static_cast<long double>(a[i] - b[i]) * (a[i] - b[i]);
    return static_cast<double>(s);
}

std::vector<const KernelTable*> variants() {
    std::vector<const KernelTable*> v{&scalar_table()};
    if (avx2_table()) v.push_back(avx2_table());
    if (neon_table()) v.push_back(neon_table());
    return v;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("every variant matches the oracle on all tail lengths") {
    std::mt19937_64 rng(7);
    for (const KernelTable* k : variants()) {
        CAPTURE(to_string(k->isa));
        for (std::size_t n = 0; n <= 67; ++n) {
            const auto a = random_vector(n, rng);
            const auto b = random_vector(n, rng);
            const double want = oracle_sq(a.data(), b.data(), n);
            CHECK(k->squared_distance(a.data(), b.data(), n) == doctest::Approx(want).epsilon(1e-13));
        }
    }
}

TEST_CASE("row kernel equals repeated single distances") {
    std::mt19937_64 rng(11);
    for (const KernelTable* k : variants()) {
        CAPTURE(to_string(k->isa));
        for (std::size_t n : {1u, 3u, 4u, 9u, 40u, 149u}) {
            const std::size_t stride = (n + 3) / 4 * 4;
            const std::size_t rows = 37;
            std::vector<double> data(rows * stride, 0.0);
            for (std::size_t r = 0; r < rows; ++r) {
                const auto v = random_vector(n, rng);
                std::copy(v.begin(), v.end(), data.begin() + static_cast<std::ptrdiff_t>(r * stride));
            }
            const auto q = random_vector(n, rng);
            std::vector<double> out(rows);
            k->squared_distance_rows(q.data(), data.data(), rows, stride, n, out.data());
            for (std::size_t r = 0; r < rows; ++r) {
                CHECK(out[r] == doctest::Approx(oracle_sq(q.data(), data.data() + r * stride, n)).epsilon(1e-13));
            }
        }
    }
}

TEST_CASE("SIMD variants agree with the scalar reference") {
    std::mt19937_64 rng(13);
    const KernelTable& ref = scalar_table();
    for (const KernelTable* k : variants()) {
        for (std::size_t n : {5u, 64u, 100u, 151u}) {
            const auto a = random_vector(n, rng);
            const auto b = random_vector(n, rng);
            const double r = ref.squared_distance(a.data(), b.data(), n);
            CHECK(std::abs(k->squared_distance(a.data(), b.data(), n) - r) <= 1e-14 * std::max(1.0, r));
        }
    }
}

TEST_CASE("min_update is an exact elementwise minimum") {
    std::mt19937_64 rng(17);
    for (const KernelTable* k : variants()) {
        for (std::size_t n = 0; n <= 21; ++n) {
            auto run = random_vector(n, rng);
            const auto cand = random_vector(n, rng);
            auto want = run;
            for (std::size_t i = 0; i < n; ++i) want[i] = std::min(run[i], cand[i]);
            k->min_update(run.data(), cand.data(), n);
            CHECK(run == want);
        }
        std::vector<double> inf(5, INFINITY);
        const std::vector<double> c{1, 2, 3, 4, 5};
        k->min_update(inf.data(), c.data(), 5);
        CHECK(inf == c);
    }
}

TEST_CASE("selection and names") {
    CHECK(available(Isa::Scalar));
    CHECK(parse_isa("scalar") == Isa::Scalar);
    CHECK(parse_isa("avx2") == Isa::Avx2);
    CHECK(!parse_isa("sse9").has_value());
    const Isa before = active().isa;
    select(Isa::Scalar);
    CHECK(active().isa == Isa::Scalar);
    select(before);
    CHECK(active().isa == before);
}

}  // TEST_SUITE
