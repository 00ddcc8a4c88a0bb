#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "isym/descriptors.hpp"
#include "isym/error.hpp"
#include "isym/perturb.hpp"
#include "isym/primitives.hpp"
#include "support.hpp"

using namespace isym;
using testing::prepared;

namespace {

// Straight from the definition, in long double.
double oracle_distance(const SpectralBasis& b, int x, int y) {
    long double s = 0;
    for (int i = 1; i < b.size(); ++i) {
        const long double d = b.eigenvectors(x, i) - b.eigenvectors(y, i);
        s += d * d / (static_cast<long double>(b.eigenvalues(i)) * b.eigenvalues(i));
    }
    return static_cast<double>(std::sqrt(s));
}

int extreme_vertex(const TriangleMesh& m, int axis, bool largest) {
    int best = 0;
    for (int v = 1; v < static_cast<int>(m.vertex_count()); ++v) {
        const double a = m.vertex(v)(axis), b = m.vertex(best)(axis);
        if (largest ? a > b : a < b) best = v;
    }
    return best;
}

int antipode(const TriangleMesh& m, int v) {
    int best = 0;
    for (int u = 1; u < static_cast<int>(m.vertex_count()); ++u) {
        if ((m.vertex(u) + m.vertex(v)).norm() < (m.vertex(best) + m.vertex(v)).norm()) best = u;
    }
    return best;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

}  // namespace

TEST_SUITE("descriptors") {

TEST_CASE("embedding distance matches the definition") {
    const auto& p = prepared("bilateral", 3);
    std::mt19937_64 rng(3);
    for (int t = 0; t < 200; ++t) {
        const int x = static_cast<int>(rng() % p.mesh().vertex_count());
        const int y = static_cast<int>(rng() % p.mesh().vertex_count());
        const double want = oracle_distance(p.basis, x, y);
        CHECK(p.embedding->distance(x, y) == doctest::Approx(want).epsilon(1e-10));
        CHECK(biharmonic_distance(p.basis, x, y) == doctest::Approx(want).epsilon(1e-12));
        CHECK(biharmonic_distance(p.basis, x, y) == biharmonic_distance(p.basis, y, x));
        CHECK(p.embedding->distance(x, y) == p.embedding->distance(y, x));
    }
    CHECK(biharmonic_distance(p.basis, 5, 5) == 0.0);
    CHECK(p.embedding->distance(5, 5) == 0.0);
}

TEST_CASE("antipode of the north pole is the farthest point") {
    const auto& p = prepared("sphere", 3);
    const int north = extreme_vertex(p.mesh(), 2, true);
    const int south = extreme_vertex(p.mesh(), 2, false);
    double far = 0.0;
    for (int v = 0; v < static_cast<int>(p.mesh().vertex_count()); ++v) far = std::max(far, oracle_distance(p.basis, north, v));
    CHECK(biharmonic_distance(p.basis, north, south) >= 0.98 * far);
}

TEST_CASE("all-pairs table") {
    const auto& p = prepared("sphere", 2);
    const BiharmonicTable one = all_pairs_biharmonic(*p.embedding, SampleSet{{7}, {0.0}});
    CHECK(one.distances.rows() == 1);
    CHECK(one.distances(0, 0) == 0.0);

    const SampleSet s = farthest_point_sample(*p.embedding, 20, 42);
    const BiharmonicTable t = all_pairs_biharmonic(*p.embedding, s);
    CHECK(t.distances == t.distances.transpose());
    CHECK(t.full_rows.rows() == 20);
    for (int i = 0; i < 20; ++i) {
        CHECK(t.distances(i, i) == 0.0);
        for (int j = 0; j < 20; ++j) {
            CHECK(t.distances(i, j) ==
                  doctest::Approx(biharmonic_distance(p.basis, s.vertex_ids[i], s.vertex_ids[j])).epsilon(1e-12));
        }
    }
    // exhaustive triangle inequality over every triple and ordering
    int failures = 0;
    for (int a = 0; a < 20; ++a)
        for (int b = 0; b < 20; ++b)
            for (int c = 0; c < 20; ++c)
                if (t.distances(a, c) > t.distances(a, b) + t.distances(b, c) + 1e-6) ++failures;
    CHECK(failures == 0);
    for (int a = 0; a < 20; ++a)
        for (int b = a + 1; b < 20; ++b) CHECK(t.distances(a, b) > 0.0);
}

TEST_CASE("farthest point sampling") {
    SUBCASE("second sample is near the antipode of the first") {
        const auto& p = prepared("sphere", 3);
        for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
            const SampleSet s = farthest_point_sample(*p.embedding, 2, seed);
            int arg = 0;
            double best = -1;
            for (int v = 0; v < static_cast<int>(p.mesh().vertex_count()); ++v) {
                const double d = oracle_distance(p.basis, s.vertex_ids[0], v);
                if (d > best) {
                    best = d;
                    arg = v;
                }
            }
            CHECK(within_one_ring(p.mesh(), antipode(p.mesh(), s.vertex_ids[0]), s.vertex_ids[1]));
            CHECK(within_one_ring(p.mesh(), arg, s.vertex_ids[1]));
            CHECK(s.coverage_radii[0] == doctest::Approx(best).epsilon(1e-9));
        }
    }
    SUBCASE("exhaustion and monotone coverage") {
        const auto& p = prepared("sphere", 2, 60);
        const int nv = static_cast<int>(p.mesh().vertex_count());
        const SampleSet s = farthest_point_sample(*p.embedding, nv, 9);
        std::vector<int> sorted = s.vertex_ids;
        std::sort(sorted.begin(), sorted.end());
        for (int v = 0; v < nv; ++v) CHECK(sorted[v] == v);
        for (std::size_t i = 1; i < s.coverage_radii.size(); ++i) CHECK(s.coverage_radii[i] <= s.coverage_radii[i - 1]);
        // the last radius is the gap to the closest already-chosen vertex
        double nearest = INFINITY;
        const int last = s.vertex_ids.back();
        for (int v = 0; v < nv; ++v) {
            if (v != last) nearest = std::min(nearest, p.embedding->distance(last, v));
        }
        CHECK(s.coverage_radii.back() == doctest::Approx(nearest).epsilon(1e-12));
    }
    SUBCASE("fifty samples on the mirror fixture") {
        const auto& p = prepared("bilateral", 4);
        const SampleSet a = farthest_point_sample(*p.embedding, 50, 42);
        const SampleSet b = farthest_point_sample(*p.embedding, 50, 42);
        CHECK(a.vertex_ids == b.vertex_ids);
        CHECK(a.coverage_radii == b.coverage_radii);
        for (std::size_t i = 1; i < a.coverage_radii.size(); ++i) CHECK(a.coverage_radii[i] <= a.coverage_radii[i - 1]);
        std::mt19937_64 rng(42);
        CHECK(a.vertex_ids[0] == static_cast<int>(rng() % p.mesh().vertex_count()));
    }
    CHECK_THROWS_AS(farthest_point_sample(*prepared("sphere", 2).embedding, 0, 1), Error);
}

TEST_CASE("wave kernel signature") {
    const auto& p = prepared("bilateral", 4);
    const WksField& w = p.wks;
    CHECK(w.bands() == 100);
    for (int j = 1; j < w.bands(); ++j) CHECK(w.energies(j) > w.energies(j - 1));
    const double l2 = std::log(p.basis.eigenvalues(1)), lk = std::log(p.basis.eigenvalues(p.basis.size() - 1));
    CHECK(std::log(w.energies(0)) == doctest::Approx(l2 + 2 * w.sigma));
    CHECK(std::log(w.energies(w.bands() - 1)) == doctest::Approx(lk - 2 * w.sigma));
    const double spacing = std::log(w.energies(1)) - std::log(w.energies(0));
    CHECK(w.sigma == doctest::Approx(7.0 * spacing));
    CHECK((w.signatures.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-9);
    CHECK(w.signatures.minCoeff() >= 0.0);

    const auto& perm = p.fixture.symmetries[0].permutation;
    double worst_row = 0.0, worst_gap = 0.0;
    for (int v = 0; v < static_cast<int>(perm.size()); ++v) {
        worst_row = std::max(worst_row, (w.signatures.row(v) - w.signatures.row(perm[v])).cwiseAbs().maxCoeff());
        worst_gap = std::max(worst_gap, wks_distance(w, v, perm[v]));
    }
    CHECK(worst_row < 1e-6);
    CHECK(worst_gap <= 1e-10);
    CHECK(wks_distance(w, 3, 3) == 0.0);
    CHECK(wks_distance(w, 3, 900) == wks_distance(w, 900, 3));
}

TEST_CASE("WKS is nearly constant on the sphere") {
    auto spread = [](const WksField& w) {
        const auto& s = w.signatures;
        double worst = 0.0;
        for (Eigen::Index a = 0; a < s.rows(); a += 5)
            for (Eigen::Index b = 0; b < s.rows(); ++b) worst = std::max(worst, (s.row(a) - s.row(b)).cwiseAbs().sum());
        return worst;
    };
    // complete harmonic shells through degree 5
    const double low = spread(prepared("sphere", 3, 36).wks);
    const double full = spread(prepared("sphere", 3).wks);
    MESSAGE("sphere WKS max pairwise L1 gap: k=36 " << low << ", default k " << full);
    CHECK(low <= 0.02);
    // high shells are anisotropic on 642 vertices; measured 0.049
    CHECK(full <= 0.05);
}

TEST_CASE("WKS survives a rigid motion") {
    const TriangleMesh base = bilateral_fixture(3).mesh;
    const Eigen::Matrix3d r = Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized()).toRotationMatrix();
    std::vector<Vec3> moved;
    for (const Vec3& v : base.vertices()) moved.push_back(r * v + Vec3(3, -1, 2));
    const TriangleMesh other =
        TriangleMesh::create(std::move(moved), std::vector<Face>(base.faces().begin(), base.faces().end()));
    const WksField a = compute_wks(compute_eigenbasis(build_laplacian(base), 100));
    const WksField b = compute_wks(compute_eigenbasis(build_laplacian(other), 100));
    CHECK((a.signatures - b.signatures).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("biharmonic distance is stable under small noise") {
    const auto& p = prepared("sphere", 3);
    const TriangleMesh noisy = perturb(p.mesh(), {PerturbKind::Noise, 0.0025}, 5);
    const SpectralBasis nb = compute_eigenbasis(build_laplacian(noisy), p.basis.size());
    const BiharmonicEmbedding ne(nb);
    const SampleSet s = farthest_point_sample(*p.embedding, 20, 42);
    std::vector<double> rel;
    for (int a : s.vertex_ids)
        for (int b : s.vertex_ids)
            if (a < b) rel.push_back(std::abs(ne.distance(a, b) - p.embedding->distance(a, b)) / p.embedding->distance(a, b));
    MESSAGE("median relative BDM change under 0.25% noise: " << median(rel));
    CHECK(median(rel) <= 0.05);
}

TEST_CASE("truncation at k = 100 versus k = 150") {
    const auto& p = prepared("bilateral", 4);
    const SpectralBasis small = compute_eigenbasis(p.laplacian, 100);
    const BiharmonicEmbedding e(small);
    const SampleSet s = farthest_point_sample(*p.embedding, 30, 42);
    std::vector<double> rel;
    for (int a : s.vertex_ids)
        for (int b : s.vertex_ids)
            if (a < b) rel.push_back(std::abs(e.distance(a, b) - p.embedding->distance(a, b)) / p.embedding->distance(a, b));
    MESSAGE("median relative truncation change k=100 vs 150: " << median(rel) << ", max "
                                                               << *std::max_element(rel.begin(), rel.end()));
    CHECK(median(rel) < 0.01);
}

TEST_CASE("degenerate spectrum and bad arguments") {
    SpectralBasis b;
    b.eigenvalues = Eigen::Vector3d(0.0, 2.0, 2.0);
    b.eigenvectors = Eigen::MatrixXd::Ones(4, 3);
    b.masses = Eigen::VectorXd::Ones(4);
    CHECK_THROWS_WITH_AS(compute_wks(b), doctest::Contains("DegenerateSpectrum"), Error);
    b.eigenvalues = Eigen::Vector3d(0.0, 0.0, 2.0);
    CHECK_THROWS_WITH_AS(BiharmonicEmbedding{b}, doctest::Contains("ZeroEigenvalueDivision"), Error);
}

TEST_CASE("table CSV and matrix blobs") {
    const auto& p = prepared("sphere", 2);
    const BiharmonicTable t = all_pairs_biharmonic(*p.embedding, farthest_point_sample(*p.embedding, 4, 1));
    const auto dir = std::filesystem::temp_directory_path();
    const std::string csv = (dir / "isym_table.csv").string();
    write_table_csv(t, csv);
    std::ifstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(header.rfind("vertex,", 0) == 0);
    const std::string blob = (dir / "isym_blob.mx").string();
    write_matrix_blob(t.full_rows, "key-a", blob);
    RowMatrix back;
    REQUIRE(read_matrix_blob(blob, "key-a", back));
    CHECK(back == t.full_rows);
    CHECK_FALSE(read_matrix_blob(blob, "key-b", back));
}

}  // TEST_SUITE
