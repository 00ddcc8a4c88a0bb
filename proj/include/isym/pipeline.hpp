#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "isym/descriptors.hpp"
#include "isym/fmap.hpp"
#include "isym/mesh.hpp"
#include "isym/perturb.hpp"
#include "isym/spectral.hpp"
#include "isym/symmetry_space.hpp"
#include "isym/voting.hpp"

namespace isym {

struct PipelineConfig {
    std::string mesh_path;
    int basis_k = 0;  // 0: min(150, V - 2)
    int samples = 50;
    int wks_bands = 100;
    double wks_sigma_factor = 7.0;
    double t_wks_percentile = 15.0;
    double eps = 0.02;
    double min_support = 0.30;
    int twins_per_sample = 1;
    bool canonicalize = true;
    double region_radius = 0.25;
    int k_f = 40;
    double mu = 1e-2;
    double bump_width = 0.05;
    double gaussian_width = 0.0;  // 0: k_f / 10
    int k_groups = 0;             // 0: silhouette sweep (one group below three maps)
    std::uint64_t seed = 42;
    std::string output_dir = "isym_out";
    int threads = 0;  // 0: runtime default
    bool export_ply = true;
    bool use_cache = true;

    /// Throws InvalidSpec naming the offending field.
    void validate() const;
};

/// Overlays the keys present in a JSON object onto cfg; unknown keys throw
/// InvalidSpec.
void apply_config_json(PipelineConfig& cfg, const std::string& json_text);
PipelineConfig load_config(const std::string& path);
/// Effective configuration, output directory omitted.
std::string config_json(const PipelineConfig& cfg);

/// Directory-backed store for bases, distance tables and WKS fields. The
/// location is $ISYM_CACHE_DIR, else $XDG_CACHE_HOME/isym, else
/// $HOME/.cache/isym.
class Cache {
public:
    explicit Cache(std::string dir);
    static Cache from_environment();
    const std::string& dir() const { return dir_; }

    std::optional<SpectralBasis> load_basis(const std::string& mesh_hash, int k) const;
    void store_basis(const SpectralBasis& basis, const std::string& mesh_hash, int k) const;
    std::optional<RowMatrix> load_matrix(const std::string& key) const;
    void store_matrix(const RowMatrix& m, const std::string& key) const;

private:
    std::string dir_;
};

void set_thread_count(int threads);

/// Wall-clock seconds per stage. distance, fmap and extraction partition
/// total into the three columns of the usual timing table.
struct StageTimings {
    std::map<std::string, double> steps;  // fine-grained, in run order
    double distance = 0.0;
    double fmap = 0.0;
    double extraction = 0.0;
    double total = 0.0;
};

struct DetectionResult {
    std::string mesh_hash;
    int basis_k = 0;
    SpectralBasis basis;
    WksField wks;
    SampleSet samples;               // farthest point samples
    std::vector<CandidatePair> candidates;  // sample / twin pairs
    std::vector<int> voting_vertices;       // samples followed by twins
    BiharmonicTable table;                  // over voting_vertices, full rows kept
    double t_wks = 0.0;
    double exclusion_radius = 0.0;
    std::vector<VotedPair> pairs;  // after orientation
    std::vector<std::vector<VotedPair>> clusters;
    std::vector<FunctionalMap> maps;
    std::vector<int> map_cluster;  // cluster index of each map
    std::vector<Correspondence> correspondences;
    ClusterResult grouping;
    WeightMatrix weights;
    int k_groups = 0;
    StageTimings timings;
    std::map<std::string, bool> cache_hits;
    std::vector<std::string> warnings;
};

/// Runs mesh -> basis -> descriptors -> voting -> maps -> scores -> groups.
/// Errors keep their code and gain a "stage: " prefix.
DetectionResult run_detection(const TriangleMesh& mesh, const PipelineConfig& cfg, const Cache* cache);

/// Writes manifest.json, timings.json, pairs.json, samples.csv,
/// maps/map_NNN.json, maps/map_NNN_correspondence.json, scores.csv,
/// clusters.json and, when enabled, colored PLYs. Only timings.json varies
/// between identical runs.
void write_artifacts(const TriangleMesh& mesh, const PipelineConfig& cfg, const DetectionResult& result);

struct RepeatabilityReport {
    Perturbation perturbation;
    std::vector<double> overlaps;
    std::vector<double> repeatability;  // fraction of base pairs at each overlap
    std::vector<double> pair_overlap;   // best overlap of every base pair
    StageTimings base_timings;
    StageTimings perturbed_timings;
};

/// Overlap of two pairs: 1 - (largest endpoint displacement) / diameter,
/// over both orientations, measured with the base embedding.
double pair_overlap(const VotedPair& base, const VotedPair& other, const BiharmonicEmbedding& embedding,
                    double diameter);

/// Grid default: 0.5, 0.55, ..., 1.0.
std::vector<double> default_overlap_grid();

RepeatabilityReport evaluate_repeatability(const TriangleMesh& mesh, const PipelineConfig& cfg,
                                           const Perturbation& perturbation, const std::vector<double>& overlaps,
                                           const Cache* cache);

std::string repeatability_csv(const RepeatabilityReport& report);
std::string timings_table(const StageTimings& t);

}  // namespace isym
