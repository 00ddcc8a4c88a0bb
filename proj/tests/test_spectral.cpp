#include <doctest.h>

#include <chrono>
#include <filesystem>

#include <Eigen/Eigenvalues>

#include "isym/error.hpp"
#include "isym/primitives.hpp"
#include "isym/spectral.hpp"
#include "support.hpp"

using namespace isym;

namespace {

struct DenseOracle {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;  // M-orthonormal
};

DenseOracle dense_solve(const LaplacianPair& lap) {
    const Eigen::MatrixXd k = Eigen::MatrixXd(lap.stiffness);
    const Eigen::MatrixXd m = lap.mass.asDiagonal();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(k, m);
    REQUIRE(es.info() == Eigen::Success);
    return {es.eigenvalues(), es.eigenvectors()};
}

// Cotangent weights recomputed from angles, as an independent check on the
// assembled stiffness matrix.
double oracle_weight(const TriangleMesh& mesh, int i, int j) {
    double w = 0.0;
    for (const Face& f : mesh.faces()) {
        for (int c = 0; c < 3; ++c) {
            const int a = f[c], b = f[(c + 1) % 3], o = f[(c + 2) % 3];
            if ((a == i && b == j) || (a == j && b == i)) {
                const Vec3 u = mesh.vertex(a) - mesh.vertex(o);
                const Vec3 v = mesh.vertex(b) - mesh.vertex(o);
                const double angle = std::acos(u.normalized().dot(v.normalized()));
                w += 0.5 / std::tan(angle);
            }
        }
    }
    return w;
}

}  // namespace

TEST_SUITE("spectral") {

TEST_CASE("cotangent Laplacian structure") {
    const TriangleMesh mesh = bilateral_fixture(2).mesh;
    const LaplacianPair lap = build_laplacian(mesh);
    const Eigen::MatrixXd k = Eigen::MatrixXd(lap.stiffness);
    CHECK((k - k.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(k.rowwise().sum().cwiseAbs().maxCoeff() < 1e-12);
    double area = 0.0;
    for (int f = 0; f < static_cast<int>(mesh.face_count()); ++f) area += mesh.face_area(f);
    CHECK(lap.mass.sum() == doctest::Approx(area).epsilon(1e-12));
    for (int i = 0; i < 30; ++i) {
        for (int j : mesh.neighbors(i)) CHECK(-k(i, j) == doctest::Approx(oracle_weight(mesh, i, j)).epsilon(1e-9));
    }
}

TEST_CASE("boundary edges take their single face") {
    const TriangleMesh g = grid_square(3, 3);
    const LaplacianPair lap = build_laplacian(g);
    const Eigen::MatrixXd k = Eigen::MatrixXd(lap.stiffness);
    // right-angle grid: boundary edge opposite a 45 degree angle has weight 1/2
    CHECK(k.rowwise().sum().cwiseAbs().maxCoeff() < 1e-12);
    CHECK(-k(0, 1) == doctest::Approx(oracle_weight(g, 0, 1)));
}

TEST_CASE("eigenpairs agree with a dense generalized solver") {
    for (const char* name : {"sphere", "bilateral"}) {
        CAPTURE(name);
        const TriangleMesh mesh = fixture_by_name(name, 2)->mesh;
        const LaplacianPair lap = build_laplacian(mesh);
        const int k = 30;
        const SpectralBasis b = compute_eigenbasis(lap, k);
        const DenseOracle d = dense_solve(lap);
        CHECK(std::abs(b.eigenvalues(0)) < 1e-10);
        for (int i = 1; i < k; ++i) CHECK(b.eigenvalues(i) == doctest::Approx(d.values(i)).epsilon(1e-8));
        // every computed vector lies in the oracle eigenspace of its eigenvalue
        for (int i = 0; i < k; ++i) {
            std::vector<int> cluster;
            for (int j = 0; j < d.values.size(); ++j) {
                if (std::abs(d.values(j) - b.eigenvalues(i)) <= 1e-6 * std::max(1.0, d.values(j))) cluster.push_back(j);
            }
            REQUIRE(!cluster.empty());
            Eigen::VectorXd rest = b.eigenvectors.col(i);
            for (int j : cluster) {
                const double c = d.vectors.col(j).dot(lap.mass.cwiseProduct(b.eigenvectors.col(i)));
                rest -= c * d.vectors.col(j);
            }
            CHECK(std::sqrt(rest.dot(lap.mass.cwiseProduct(rest))) < 1e-6);
        }
    }
}

TEST_CASE("residual, orthonormality and sign convention") {
    const auto& p = testing::prepared("bilateral", 3);
    CHECK(max_eigen_residual(p.laplacian, p.basis) < 1e-8);
    CHECK(max_orthonormality_error(p.basis) < 1e-10);
    for (int i = 0; i < p.basis.size(); ++i) {
        Eigen::Index arg;
        p.basis.eigenvectors.col(i).cwiseAbs().maxCoeff(&arg);
        CHECK(p.basis.eigenvectors(arg, i) > 0.0);
    }
    for (int i = 1; i < p.basis.size(); ++i) CHECK(p.basis.eigenvalues(i) >= p.basis.eigenvalues(i - 1));
}

TEST_CASE("icosphere(2) low spectrum") {
    const auto t0 = std::chrono::steady_clock::now();
    const LaplacianPair lap = build_laplacian(icosphere(2));
    const SpectralBasis b = compute_eigenbasis(lap, 10);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(b.eigenvalues(0) <= 1e-8 * b.eigenvalues(1));
    // l = 1 spherical harmonics: three equal eigenvalues near 2
    CHECK(b.eigenvalues(3) / b.eigenvalues(1) < 1.02);
    CHECK(b.eigenvalues(1) == doctest::Approx(2.0).epsilon(0.02));
    CHECK(secs < 5.0);
}

TEST_CASE("basis size limits") {
    const LaplacianPair lap = build_laplacian(icosphere(0));
    const auto code = [&](int k) {
        try {
            compute_eigenbasis(lap, k);
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::IoError;
    };
    CHECK(code(1) == ErrorCode::InvalidArgument);
    CHECK(code(12) == ErrorCode::InsufficientRank);
    const SpectralBasis b = compute_eigenbasis(lap, 11);
    CHECK(b.size() == 11);
    CHECK(default_basis_size(12) == 10);
    CHECK(default_basis_size(100000) == 150);
}

TEST_CASE("projection round trip") {
    const auto& p = testing::prepared("bilateral", 3);
    Eigen::VectorXd coeff = Eigen::VectorXd::Zero(p.basis.size());
    coeff(0) = 0.5;
    coeff(3) = -1.25;
    coeff(17) = 2.0;
    const Eigen::VectorXd f = reconstruct(p.basis, coeff);
    CHECK((project(p.basis, f) - coeff).cwiseAbs().maxCoeff() < 1e-9);
    const std::vector<double> shorter(3, 1.0);
    CHECK_THROWS_AS(project(p.basis, shorter), Error);
}

TEST_CASE("basis cache file round trip and key checks") {
    const auto& p = testing::prepared("bilateral", 3);
    const auto path = (std::filesystem::temp_directory_path() / "isym_basis_test.bin").string();
    const std::string hash = p.mesh().content_hash();
    write_basis(p.basis, hash, path);
    SpectralBasis back;
    REQUIRE(read_basis(path, hash, p.basis.size(), back));
    CHECK(back.eigenvalues == p.basis.eigenvalues);
    CHECK(back.eigenvectors == p.basis.eigenvectors);
    CHECK(back.masses == p.basis.masses);
    CHECK_FALSE(read_basis(path, std::string(64, '0'), p.basis.size(), back));
    CHECK_FALSE(read_basis(path, hash, p.basis.size() - 1, back));
    CHECK_FALSE(read_basis(path + ".missing", hash, p.basis.size(), back));
}

}  // TEST_SUITE
