#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "isym/descriptors.hpp"
#include "isym/spectral.hpp"
#include "isym/voting.hpp"

namespace isym {

struct Regions {
    std::vector<int> source;       // sorted vertex ids
    std::vector<int> destination;  // sorted vertex ids
};

/// Linear map between spectral coefficient vectors: a function with
/// coefficients a on the source corresponds to C * a on the destination.
struct FunctionalMap {
    Eigen::MatrixXd C;
    int basis_size = 0;
    std::vector<VotedPair> seed_pairs;
    std::vector<int> region_source;
    std::vector<int> region_destination;
};

struct Correspondence {
    std::vector<std::pair<int, int>> pairs;  // (source, destination), source ascending
    std::vector<double> residuals;           // spectral embedding distance of each match
};

struct MapOptions {
    int basis_size = 40;         // k_f
    double regularizer = 1e-2;   // weight of the commutativity term
    double bump_width = 0.05;    // Gaussian seed indicator width, fraction of the diameter
    double rank_tolerance = 1e-9;
};

/// Distances from a vertex to every mesh vertex, read from the table's full
/// rows or computed from the embedding when the vertex is not a sample.
class DistanceRows {
public:
    DistanceRows(const BiharmonicTable& table, const BiharmonicEmbedding* embedding = nullptr);
    std::vector<double> row(int vertex) const;
    double diameter() const { return diameter_; }

private:
    const BiharmonicTable* table_;
    const BiharmonicEmbedding* embedding_;
    double diameter_;
};

/// Union of biharmonic balls of radius * diameter around the sources and,
/// separately, the destinations of the cluster. Throws EmptyRegion for an
/// empty cluster and InvalidArgument for radius outside (0, 1].
Regions extract_regions(const std::vector<VotedPair>& cluster, const DistanceRows& rows, double radius);

/// Closed-form least squares for C given constraint coefficient columns
/// (A, B both k_f x m): minimizes ||C A - B||^2 + mu ||L C - C L||^2 with L
/// the eigenvalues normalized by the largest. Throws RankDeficient when A
/// has numerical rank below k_f.
Eigen::MatrixXd solve_functional_map(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                     const Eigen::VectorXd& eigenvalues, double mu, double rank_tolerance = 1e-9);

/// Constraints: every WKS band restricted to each region, and a Gaussian
/// bump around every seed source / destination. Each constraint pair is
/// scaled by 1 / |a_c|.
FunctionalMap estimate_map(const SpectralBasis& basis, const WksField& wks, const std::vector<VotedPair>& seeds,
                           const Regions& regions, const DistanceRows& rows, const MapOptions& options = {});

/// C = Phi^T M Pi Phi for the pointwise map v -> target[v], truncated to k_f.
Eigen::MatrixXd pointwise_to_functional(const SpectralBasis& basis, const std::vector<int>& target, int k_f);

/// Nearest destination-region vertex of C * phi(v) in the first k_f
/// eigenfunctions, for every source-region vertex; lowest id wins ties.
Correspondence recover_correspondence(const FunctionalMap& map, const SpectralBasis& basis);

/// Orients every pair so that its endpoint nearer to the anchor (exact ties:
/// the lower id) is the source.
std::vector<VotedPair> resolve_flip(const std::vector<VotedPair>& pairs, const DistanceRows& rows, int anchor);

/// Greedy agglomeration in the given order: a pair joins the first cluster
/// whose every member it mutually votes with, else opens a new one.
std::vector<std::vector<VotedPair>> cluster_seed_pairs(const std::vector<VotedPair>& pairs,
                                                       const BiharmonicTable& table, double eps);

std::string functional_map_json(const FunctionalMap& map);
FunctionalMap functional_map_from_json(const std::string& text);
std::string correspondence_json(const Correspondence& corr);

}  // namespace isym
