#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace isym {

/// W_ij = 1 - exp(-(i - j)^2 / (2 width^2)), zero on the diagonal.
struct WeightMatrix {
    Eigen::MatrixXd W;
    double gaussian_width = 0.0;
};

WeightMatrix build_weight_matrix(int k_f, double gaussian_width);

/// Default width: k_f / 10.
double default_gaussian_width(int k_f);

/// sum W_ij C_ij^2 / sum C_ij^2: the weighted off-diagonal energy fraction.
/// An all-zero C scores 0 and emits a warning. Throws DimensionMismatch.
double symmetry_score(const Eigen::MatrixXd& C, const WeightMatrix& W);

struct SymmetryRecord {
    int map_id = 0;
    double score = 0.0;
    std::optional<int> cluster_label;
};

double symmetry_distance(const SymmetryRecord& a, const SymmetryRecord& b);

struct ClusterOptions {
    int k_groups = 3;
    std::uint64_t seed = 42;
    int max_iterations = 300;
    double tolerance = 1e-6;  // largest centroid movement that counts as converged
    int restarts = 10;        // k-means++ initializations; lowest inertia wins
};

struct ClusterResult {
    std::vector<SymmetryRecord> records;  // one per map, in input order
    Eigen::MatrixXd centroids;            // k_groups x k_f^2, label order
    std::vector<double> centroid_scores;
    double inertia = 0.0;
    int iterations = 0;
};

/// k-means on row-major flattened maps. Labels are renumbered so centroid
/// scores ascend. Throws TooFewMaps when maps < k_groups and
/// DimensionMismatch when the maps differ in size.
ClusterResult cluster_maps(const std::vector<Eigen::MatrixXd>& maps, const WeightMatrix& W,
                           const ClusterOptions& options);

/// Mean silhouette of a labelling under Euclidean distance; 0 when only one
/// cluster is present.
double silhouette(const Eigen::MatrixXd& points, const std::vector<int>& labels);

/// Runs cluster_maps for k = 2..min(8, maps - 1) and keeps the best mean
/// silhouette (ties: smaller k). Needs at least three maps.
ClusterResult cluster_maps_auto(const std::vector<Eigen::MatrixXd>& maps, const WeightMatrix& W,
                                ClusterOptions options, std::vector<std::pair<int, double>>* sweep = nullptr);

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

std::string scores_csv(const std::vector<SymmetryRecord>& records);
std::string clusters_json(const ClusterResult& result);

}  // namespace isym
