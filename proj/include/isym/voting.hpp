#pragma once

#include <string>
#include <vector>

#include "isym/descriptors.hpp"
#include "isym/mesh.hpp"

namespace isym {

/// Sample pair whose WKS rows are close enough to be a good voter.
struct CandidatePair {
    int a = -1;
    int b = -1;
    double wks_gap = 0.0;
};

struct VotedPair {
    int source = -1;
    int destination = -1;
    int votes = 0;
    double support_ratio = 0.0;
    /// Indices into the candidate list of the voters that agreed.
    std::vector<int> supporting_pairs;
};

/// WKS gate, either an absolute squared distance or a percentile in (0, 100]
/// of all pairwise sample gaps (nearest rank).
struct WksThreshold {
    enum class Kind { Absolute, Percentile };
    Kind kind = Kind::Percentile;
    double value = 15.0;

    static WksThreshold absolute(double t) { return {Kind::Absolute, t}; }
    static WksThreshold percentile(double p) { return {Kind::Percentile, p}; }
};

/// Absolute value the threshold resolves to for this sample set.
double resolve_threshold(const std::vector<int>& samples, const WksField& wks, const WksThreshold& threshold);

/// All unordered sample pairs (a < b by vertex id) with gap <= threshold,
/// sorted by (a, b). May be empty.
std::vector<CandidatePair> generate_good_voters(const std::vector<int>& samples, const WksField& wks,
                                                double t_wks);
std::vector<CandidatePair> generate_good_voters(const SampleSet& samples, const WksField& wks,
                                                const WksThreshold& threshold);

/// For each sample a, the vertices v that are local minima of the gap
/// field wks_distance(a, .) over the 1-ring graph, lie farther than
/// exclusion_radius from a in biharmonic distance and have gap <= t_wks.
/// Up to max_twins per sample, smallest gap first, as pairs (a, v). Pairs
/// whose reverse was already emitted are dropped.
std::vector<CandidatePair> find_wks_twins(const TriangleMesh& mesh, const BiharmonicEmbedding& embedding,
                                          const WksField& wks, const std::vector<int>& samples, double t_wks,
                                          double exclusion_radius, int max_twins = 1);

/// samples followed by every pair endpoint not already present, in order.
std::vector<int> with_pair_endpoints(const std::vector<int>& samples, const std::vector<CandidatePair>& pairs);

/// Intrinsic-distance test between the ordered pair (x, x') and the voter
/// (y, y'), both orientations of the voter tried. Tolerance is eps times the
/// largest table entry. Vertices must be samples of the table.
bool distance_vote(int x, int x_prime, int y, int y_prime, const BiharmonicTable& table, double eps);

/// Same test on table positions instead of vertex ids.
bool distance_vote_indexed(int x, int x_prime, int y, int y_prime, const BiharmonicTable& table, double eps);

/// Counts, for each candidate taken in its (a, b) order, the agreeing voters
/// among all other candidates except its exact reverse. support_ratio =
/// votes / eligible voters (0 when there are none). Returns pairs with
/// support_ratio >= min_support, highest support first; ties keep
/// candidate order.
std::vector<VotedPair> run_voting(const std::vector<CandidatePair>& candidates, const BiharmonicTable& table,
                                  double eps, double min_support);

std::string voted_pairs_json(const std::vector<VotedPair>& pairs);

}  // namespace isym
