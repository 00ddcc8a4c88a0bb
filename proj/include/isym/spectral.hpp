#pragma once

#include <cstddef>
#include <span>
#include <string>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "isym/mesh.hpp"

namespace isym {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Cotangent stiffness matrix and lumped (barycentric) mass.
struct LaplacianPair {
    SparseMatrix stiffness;  // symmetric positive semidefinite, rows sum to 0
    Eigen::VectorXd mass;    // one third of the incident face area per vertex
};

/// Off-diagonal (i,j) is -(cot a + cot b)/2 over the angles opposite the
/// edge; boundary edges contribute their single face. Throws
/// NumericalDegeneracy if a cotangent blows up.
LaplacianPair build_laplacian(const TriangleMesh& mesh);

/// Low end of the spectrum of stiffness * phi = lambda * mass * phi.
///
/// Eigenvectors are mass-orthonormal, eigenvalues ascending. Each
/// eigenvector is signed so that its largest-magnitude entry is positive;
/// runs of numerically equal eigenvalues are ordered lexicographically by
/// vertex values.
struct SpectralBasis {
    Eigen::VectorXd eigenvalues;   // k
    Eigen::MatrixXd eigenvectors;  // V x k, column i is phi_{i+1}
    Eigen::VectorXd masses;        // V

    int size() const { return static_cast<int>(eigenvalues.size()); }
    std::size_t vertex_count() const { return static_cast<std::size_t>(masses.size()); }
};

struct EigenOptions {
    double tolerance = 1e-10;  // relative residual in the mass-normalized problem
    int block_size = 10;       // must exceed the largest eigenvalue multiplicity
    /// Cap on the Krylov dimension; 0 means V - 1.
    int max_dimension = 0;
};

/// Shift-invert block Lanczos with full reorthogonalization. The constant
/// kernel of the connected-mesh Laplacian is deflated analytically, so
/// lambda_1 = 0 with a constant phi_1.
/// Requires 2 <= k <= V - 1 (InvalidArgument / InsufficientRank); throws
/// ConvergenceFailure when the Krylov dimension cap is reached.
SpectralBasis compute_eigenbasis(const LaplacianPair& lap, int k, const EigenOptions& options = {});

/// Default basis size: min(150, V - 2).
int default_basis_size(std::size_t vertex_count);

/// a_i = sum_v mass(v) field(v) phi_i(v). Throws LengthMismatch.
Eigen::VectorXd project(const SpectralBasis& basis, std::span<const double> field);
Eigen::VectorXd project(const SpectralBasis& basis, const Eigen::VectorXd& field);
/// sum_i coeffs(i) phi_i
Eigen::VectorXd reconstruct(const SpectralBasis& basis, const Eigen::VectorXd& coeffs);

/// Largest ||K phi - lambda M phi|| / (||M phi|| max(lambda_k, 1)) over the basis.
double max_eigen_residual(const LaplacianPair& lap, const SpectralBasis& basis);
/// max |Phi^T M Phi - I| entry.
double max_orthonormality_error(const SpectralBasis& basis);

/// Binary cache layout (little-endian):
///   char[8] "ISYMSB01" | u64 V | u64 k | char[64] mesh hash |
///   f64 eigenvalues[k] | f64 masses[V] | f64 eigenvectors[V*k] (column-major)
void write_basis(const SpectralBasis& basis, const std::string& mesh_hash, const std::string& path);
/// Returns false if the file is missing, malformed or was written for a
/// different mesh or size.
bool read_basis(const std::string& path, const std::string& mesh_hash, int k, SpectralBasis& out);

}  // namespace isym
