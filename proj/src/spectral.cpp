#include "isym/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SparseCholesky>

#include "isym/error.hpp"

namespace isym {

LaplacianPair build_laplacian(const TriangleMesh& mesh) {
    const int nv = static_cast<int>(mesh.vertex_count());
    std::vector<Eigen::Triplet<double>> off;
    off.reserve(mesh.face_count() * 6);
    Eigen::VectorXd mass = Eigen::VectorXd::Zero(nv);
    for (int f = 0; f < static_cast<int>(mesh.face_count()); ++f) {
        const Face& t = mesh.face(f);
        for (int c = 0; c < 3; ++c) {
            const int i = t[c];
            const int j = t[(c + 1) % 3];
            const int l = t[(c + 2) % 3];
            const Vec3 u = mesh.vertex(j) - mesh.vertex(i);
            const Vec3 v = mesh.vertex(l) - mesh.vertex(i);
            const double sin_scaled = u.cross(v).norm();
            const double cos_scaled = u.dot(v);
            if (!(sin_scaled > 1e-12 * std::abs(cos_scaled))) {
                throw Error(ErrorCode::NumericalDegeneracy, "cotangent overflow in face " + std::to_string(f));
            }
            const double w = 0.5 * cos_scaled / sin_scaled;
            off.emplace_back(j, l, -w);
            off.emplace_back(l, j, -w);
        }
        const double third = mesh.face_area(f) / 3.0;
        for (int c = 0; c < 3; ++c) mass[t[c]] += third;
    }
    SparseMatrix offdiag(nv, nv);
    offdiag.setFromTriplets(off.begin(), off.end());

    std::vector<Eigen::Triplet<double>> all;
    all.reserve(static_cast<std::size_t>(offdiag.nonZeros()) + static_cast<std::size_t>(nv));
    for (int col = 0; col < offdiag.outerSize(); ++col) {
        double sum = 0.0;
        for (SparseMatrix::InnerIterator it(offdiag, col); it; ++it) {
            all.emplace_back(static_cast<int>(it.row()), col, it.value());
            sum += it.value();
        }
        all.emplace_back(col, col, -sum);  // symmetric, so column sums are row sums
    }
    LaplacianPair lap;
    lap.stiffness.resize(nv, nv);
    lap.stiffness.setFromTriplets(all.begin(), all.end());
    lap.mass = std::move(mass);
    return lap;
}

int default_basis_size(std::size_t vertex_count) {
    return static_cast<int>(std::min<std::size_t>(150, vertex_count >= 2 ? vertex_count - 2 : 0));
}

namespace {

// Largest-magnitude entry positive; ties go to the lowest vertex.
void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v[i]) > best) {
            best = std::abs(v[i]);
            arg = i;
        }
    }
    if (v[arg] < 0) v = -v;
}

bool lexicographically_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (a[i] != b[i]) return a[i] < b[i];
    }
    return false;
}

}  // namespace

SpectralBasis compute_eigenbasis(const LaplacianPair& lap, int k, const EigenOptions& options) {
    const int n = static_cast<int>(lap.mass.size());
    if (k < 2) throw Error(ErrorCode::InvalidArgument, "basis size must be at least 2");
    if (k > n - 1) {
        throw Error(ErrorCode::InsufficientRank, "basis size " + std::to_string(k) + " exceeds V - 1 = " +
                                                     std::to_string(n - 1));
    }
    const int block = std::max(1, options.block_size);
    const int max_dim = options.max_dimension > 0 ? std::min(options.max_dimension, n - 1) : n - 1;

    // Symmetric standard form A = M^-1/2 K M^-1/2. On a connected mesh its
    // kernel is exactly span(M^1/2 1), which is deflated; the Krylov space
    // lives in the orthogonal complement.
    const Eigen::VectorXd sqrt_mass = lap.mass.cwiseSqrt();
    const Eigen::VectorXd inv_sqrt_mass = sqrt_mass.cwiseInverse();
    SparseMatrix a = inv_sqrt_mass.asDiagonal() * lap.stiffness * inv_sqrt_mass.asDiagonal();
    a = 0.5 * (a + SparseMatrix(a.transpose()));
    const Eigen::VectorXd kernel = sqrt_mass.normalized();

    // Shift-invert around a point just below zero keeps the factor positive definite.
    const double shift = 1e-6 * a.diagonal().mean();
    SparseMatrix shifted = a;
    for (int i = 0; i < n; ++i) shifted.coeffRef(i, i) += shift;
    Eigen::SimplicialLLT<SparseMatrix> llt(shifted);
    if (llt.info() != Eigen::Success) {
        throw Error(ErrorCode::NumericalDegeneracy, "shifted Laplacian factorization failed");
    }

    std::mt19937_64 rng(0x5eed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    auto random_block = [&](int cols) {
        Eigen::MatrixXd r(n, cols);
        for (int j = 0; j < cols; ++j)
            for (int i = 0; i < n; ++i) r(i, j) = uni(rng);
        return r;
    };

    Eigen::MatrixXd basis_q(n, std::min(max_dim, 4 * k + 4 * block));
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(basis_q.cols(), basis_q.cols());
    int dim = 0;

    // Orthonormalizes w against the kernel and the current Krylov basis (two
    // passes), then appends its numerically independent directions.
    auto append = [&](Eigen::MatrixXd w) {
        for (int pass = 0; pass < 2; ++pass) {
            w -= kernel * (kernel.transpose() * w);
            if (dim > 0) w -= basis_q.leftCols(dim) * (basis_q.leftCols(dim).transpose() * w);
        }
        for (int j = 0; j < w.cols() && dim < max_dim; ++j) {
            Eigen::VectorXd v = w.col(j);
            for (int pass = 0; pass < 2; ++pass) {
                v -= kernel * kernel.dot(v);
                if (dim > 0) v -= basis_q.leftCols(dim) * (basis_q.leftCols(dim).transpose() * v);
            }
            double norm = v.norm();
            if (norm < 1e-10 * std::max(1.0, w.col(j).norm())) {
                // Invariant subspace hit; continue from a fresh random direction.
                v = random_block(1).col(0);
                for (int pass = 0; pass < 2; ++pass) {
                    v -= kernel * kernel.dot(v);
                    if (dim > 0) v -= basis_q.leftCols(dim) * (basis_q.leftCols(dim).transpose() * v);
                }
                norm = v.norm();
            }
            if (dim == basis_q.cols()) {
                const int grow = std::min<int>(max_dim, static_cast<int>(basis_q.cols()) + 2 * k);
                basis_q.conservativeResize(Eigen::NoChange, grow);
                Eigen::MatrixXd bigger = Eigen::MatrixXd::Zero(grow, grow);
                bigger.topLeftCorner(t.rows(), t.cols()) = t;
                t = std::move(bigger);
            }
            basis_q.col(dim++) = v / norm;
        }
    };

    append(random_block(std::min(block, max_dim)));
    int expanded = 0;  // columns whose image under the operator is in t
    int next_check = std::min(max_dim, 2 * k + block);
    Eigen::VectorXd lambda;
    Eigen::MatrixXd ritz;
    bool converged = false;
    while (!converged) {
        const int first = expanded;
        const int cols = dim - first;
        Eigen::MatrixXd w = llt.solve(basis_q.middleCols(first, cols));
        const Eigen::MatrixXd proj = basis_q.leftCols(dim).transpose() * w;
        t.block(0, first, dim, cols) = proj;
        t.block(first, 0, cols, dim) = proj.transpose();
        expanded = dim;
        if (dim < max_dim) append(std::move(w));

        if (expanded >= next_check || expanded == max_dim) {
            const Eigen::MatrixXd tt = 0.5 * (t.topLeftCorner(expanded, expanded) +
                                              t.topLeftCorner(expanded, expanded).transpose());
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(tt);
            const int want = k - 1;
            // Largest operator eigenvalues are the smallest Laplacian ones.
            const Eigen::MatrixXd u = eig.eigenvectors().rightCols(want).rowwise().reverse();
            const Eigen::VectorXd mu = eig.eigenvalues().tail(want).reverse();
            lambda = mu.cwiseInverse().array() - shift;
            ritz = basis_q.leftCols(expanded) * u;
            // Refine the values with exact Rayleigh quotients.
            const Eigen::MatrixXd ar = a * ritz;
            const double scale = std::max(std::abs(lambda[want - 1]), 1.0);
            double worst = 0.0;
            for (int i = 0; i < want; ++i) {
                lambda[i] = ritz.col(i).dot(ar.col(i));
                worst = std::max(worst, (ar.col(i) - lambda[i] * ritz.col(i)).norm() / scale);
            }
            if (std::getenv("ISYM_EIG_TRACE")) std::fprintf(stderr, "dim %d residual %.3e\n", expanded, worst);
            converged = worst <= options.tolerance;
            if (!converged) {
                if (expanded == max_dim) {
                    throw Error(ErrorCode::ConvergenceFailure,
                                "eigensolver did not converge within a Krylov dimension of " +
                                    std::to_string(max_dim));
                }
                next_check = std::min(max_dim, expanded + std::max(block, k / 4));
            }
        }
    }

    // Ritz values come out ordered by operator eigenvalue; restore ascending order
    // of the refined Rayleigh quotients.
    Eigen::VectorXd theta(k);
    Eigen::MatrixXd x(n, k);
    theta[0] = 0.0;
    x.col(0) = kernel;
    std::vector<int> order(static_cast<std::size_t>(k - 1));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int l, int r) { return lambda[l] < lambda[r]; });
    for (int i = 0; i < k - 1; ++i) {
        theta[i + 1] = lambda[order[static_cast<std::size_t>(i)]];
        x.col(i + 1) = ritz.col(order[static_cast<std::size_t>(i)]);
    }

    SpectralBasis basis;
    basis.masses = lap.mass;
    basis.eigenvalues = theta.head(k);
    basis.eigenvectors = inv_sqrt_mass.asDiagonal() * x.leftCols(k);
    const double clamp_tol = 1e-10 * std::abs(basis.eigenvalues[k - 1]);
    for (int i = 0; i < k; ++i) {
        if (std::abs(basis.eigenvalues[i]) < clamp_tol) basis.eigenvalues[i] = 0.0;
        fix_sign(basis.eigenvectors.col(i));
    }

    // Runs of numerically equal eigenvalues: order members by vertex values.
    const double tie_tol = 1e-12 * std::max(std::abs(basis.eigenvalues[k - 1]), 1.0);
    for (int start = 0; start < k;) {
        int end = start + 1;
        while (end < k && basis.eigenvalues[end] - basis.eigenvalues[end - 1] <= tie_tol) ++end;
        if (end - start > 1) {
            std::vector<int> order(static_cast<std::size_t>(end - start));
            for (int i = start; i < end; ++i) order[static_cast<std::size_t>(i - start)] = i;
            std::vector<Eigen::VectorXd> cols;
            for (int i = start; i < end; ++i) cols.emplace_back(basis.eigenvectors.col(i));
            std::stable_sort(order.begin(), order.end(), [&](int lhs, int rhs) {
                return lexicographically_less(cols[static_cast<std::size_t>(lhs - start)],
                                              cols[static_cast<std::size_t>(rhs - start)]);
            });
            const Eigen::VectorXd vals = basis.eigenvalues.segment(start, end - start);
            for (int i = start; i < end; ++i) {
                const int src = order[static_cast<std::size_t>(i - start)];
                basis.eigenvectors.col(i) = cols[static_cast<std::size_t>(src - start)];
                basis.eigenvalues[i] = vals[src - start];
            }
        }
        start = end;
    }
    return basis;
}

Eigen::VectorXd project(const SpectralBasis& basis, const Eigen::VectorXd& field) {
    if (static_cast<std::size_t>(field.size()) != basis.vertex_count()) {
        throw Error(ErrorCode::LengthMismatch, "field has " + std::to_string(field.size()) + " entries for " +
                                                   std::to_string(basis.vertex_count()) + " vertices");
    }
    return basis.eigenvectors.transpose() * basis.masses.cwiseProduct(field);
}

Eigen::VectorXd project(const SpectralBasis& basis, std::span<const double> field) {
    return project(basis, Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(field.data(), static_cast<Eigen::Index>(field.size()))));
}

Eigen::VectorXd reconstruct(const SpectralBasis& basis, const Eigen::VectorXd& coeffs) {
    if (coeffs.size() != basis.size()) {
        throw Error(ErrorCode::LengthMismatch, "coefficient vector does not match basis size");
    }
    return basis.eigenvectors * coeffs;
}

double max_eigen_residual(const LaplacianPair& lap, const SpectralBasis& basis) {
    const int k = basis.size();
    const double scale = std::max(basis.eigenvalues[k - 1], 1.0);
    double worst = 0.0;
    for (int i = 0; i < k; ++i) {
        const Eigen::VectorXd mphi = lap.mass.cwiseProduct(basis.eigenvectors.col(i));
        const Eigen::VectorXd r = lap.stiffness * basis.eigenvectors.col(i) - basis.eigenvalues[i] * mphi;
        worst = std::max(worst, r.norm() / (mphi.norm() * scale));
    }
    return worst;
}

double max_orthonormality_error(const SpectralBasis& basis) {
    const Eigen::MatrixXd g =
        basis.eigenvectors.transpose() * basis.masses.asDiagonal() * basis.eigenvectors;
    return (g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

namespace {

constexpr char kBasisMagic[8] = {'I', 'S', 'Y', 'M', 'S', 'B', '0', '1'};

}  // namespace

void write_basis(const SpectralBasis& basis, const std::string& mesh_hash, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    const std::uint64_t dims[2] = {basis.vertex_count(), static_cast<std::uint64_t>(basis.size())};
    char hash[64] = {};
    std::memcpy(hash, mesh_hash.data(), std::min<std::size_t>(64, mesh_hash.size()));
    out.write(kBasisMagic, 8);
    out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
    out.write(hash, 64);
    out.write(reinterpret_cast<const char*>(basis.eigenvalues.data()),
              static_cast<std::streamsize>(sizeof(double) * dims[1]));
    out.write(reinterpret_cast<const char*>(basis.masses.data()),
              static_cast<std::streamsize>(sizeof(double) * dims[0]));
    out.write(reinterpret_cast<const char*>(basis.eigenvectors.data()),
              static_cast<std::streamsize>(sizeof(double) * dims[0] * dims[1]));
    if (!out) throw Error(ErrorCode::IoError, "short write to " + path);
}

bool read_basis(const std::string& path, const std::string& mesh_hash, int k, SpectralBasis& out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    char magic[8];
    std::uint64_t dims[2];
    char hash[64];
    in.read(magic, 8);
    in.read(reinterpret_cast<char*>(dims), sizeof(dims));
    in.read(hash, 64);
    if (!in || std::memcmp(magic, kBasisMagic, 8) != 0) return false;
    char expected[64] = {};
    std::memcpy(expected, mesh_hash.data(), std::min<std::size_t>(64, mesh_hash.size()));
    if (std::memcmp(hash, expected, 64) != 0 || dims[1] != static_cast<std::uint64_t>(k)) return false;
    if (dims[0] == 0 || dims[0] > (1ull << 31)) return false;
    const auto nv = static_cast<Eigen::Index>(dims[0]);
    SpectralBasis b;
    b.eigenvalues.resize(k);
    b.masses.resize(nv);
    b.eigenvectors.resize(nv, k);
    in.read(reinterpret_cast<char*>(b.eigenvalues.data()), static_cast<std::streamsize>(sizeof(double) * dims[1]));
    in.read(reinterpret_cast<char*>(b.masses.data()), static_cast<std::streamsize>(sizeof(double) * dims[0]));
    in.read(reinterpret_cast<char*>(b.eigenvectors.data()),
            static_cast<std::streamsize>(sizeof(double) * dims[0] * dims[1]));
    if (!in) return false;
    out = std::move(b);
    return true;
}

}  // namespace isym
