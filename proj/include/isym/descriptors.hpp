#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "isym/spectral.hpp"

namespace isym {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Per-vertex coordinates phi_i(v) / lambda_i for i = 2..k, stored row-major
/// with rows padded to a multiple of 4 doubles. Euclidean distance between
/// two rows is the truncated biharmonic distance.
class BiharmonicEmbedding {
public:
    /// Throws ZeroEigenvalueDivision if a non-constant eigenvalue is zero.
    explicit BiharmonicEmbedding(const SpectralBasis& basis);

    std::size_t vertex_count() const { return vertex_count_; }
    std::size_t dimension() const { return dims_; }
    const double* row(int v) const { return data_.data() + static_cast<std::size_t>(v) * stride_; }

    double squared_distance(int x, int y) const;
    double distance(int x, int y) const;
    /// Distances from x to every vertex.
    void distances_from(int x, std::span<double> out) const;
    std::vector<double> distances_from(int x) const;

private:
    std::size_t vertex_count_ = 0;
    std::size_t dims_ = 0;
    std::size_t stride_ = 0;
    std::vector<double> data_;
};

/// sqrt(sum_{i=2..k} (phi_i(x) - phi_i(y))^2 / lambda_i^2), evaluated
/// straight from the basis.
double biharmonic_distance(const SpectralBasis& basis, int x, int y);

struct SampleSet {
    std::vector<int> vertex_ids;
    /// Distance of each new sample to the samples before it; the first entry
    /// is the largest distance from the first sample to any vertex.
    std::vector<double> coverage_radii;
};

/// First sample drawn from std::mt19937_64(seed) as rng() % V, then the
/// vertex maximizing the distance to the chosen set; lowest id wins ties.
SampleSet farthest_point_sample(const BiharmonicEmbedding& embedding, int count, std::uint64_t seed);

struct BiharmonicTable {
    std::vector<int> sample_ids;
    Eigen::MatrixXd distances;  // n x n, exactly symmetric
    /// Row i: distances from sample i to every vertex (n x V); may be empty.
    RowMatrix full_rows;

    int size() const { return static_cast<int>(sample_ids.size()); }
    double diameter() const { return distances.size() ? distances.maxCoeff() : 0.0; }
    /// Position of a vertex in sample_ids, or -1.
    int index_of(int vertex) const;
};

BiharmonicTable all_pairs_biharmonic(const BiharmonicEmbedding& embedding, const SampleSet& samples,
                                     bool keep_full_rows = true);

struct WksField {
    Eigen::VectorXd energies;  // e_1..e_d, strictly increasing
    double sigma = 0.0;        // log-energy band width
    RowMatrix signatures;      // V x d, rows sum to 1

    int bands() const { return static_cast<int>(energies.size()); }
};

/// Wave kernel signature over d log-spaced bands centred in
/// [log lambda_2 + 2 sigma, log lambda_k - 2 sigma], sigma = sigma_factor *
/// band spacing. Throws DegenerateSpectrum if lambda_2 >= lambda_k.
WksField compute_wks(const SpectralBasis& basis, int bands = 100, double sigma_factor = 7.0);

/// Squared Euclidean distance between signature rows.
double wks_distance(const WksField& field, int x, int y);

void write_table_csv(const BiharmonicTable& table, const std::string& path);

/// Cache blobs for dense matrices: "ISYMMX01" | char[64] key | u64 rows |
/// u64 cols | f64 row-major data. Key mismatch reads as a miss.
void write_matrix_blob(const RowMatrix& m, const std::string& key, const std::string& path);
bool read_matrix_blob(const std::string& path, const std::string& key, RowMatrix& out);

}  // namespace isym
