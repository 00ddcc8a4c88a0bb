#include "isym/pipeline.hpp"

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "isym/error.hpp"
#include "isym/hash.hpp"
#include "isym/kernels.hpp"
#include "isym/log.hpp"
#include "isym/mesh_io.hpp"

namespace fs = std::filesystem;

namespace isym {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------- config

void PipelineConfig::validate() const {
    const auto fail = [](const std::string& field, const std::string& why) {
        throw Error(ErrorCode::InvalidSpec, field + " " + why);
    };
    if (basis_k < 0 || basis_k == 1) fail("basis_k", "must be 0 (default) or at least 2");
    if (samples < 2) fail("samples", "must be at least 2");
    if (wks_bands < 2) fail("wks_bands", "must be at least 2");
    if (!(wks_sigma_factor > 0.0)) fail("wks_sigma_factor", "must be positive");
    if (!(t_wks_percentile > 0.0 && t_wks_percentile <= 100.0)) fail("t_wks_percentile", "must lie in (0, 100]");
    if (!(eps > 0.0 && eps <= 0.5)) fail("eps", "must lie in (0, 0.5]");
    if (!(min_support >= 0.0 && min_support <= 1.0)) fail("min_support", "must lie in [0, 1]");
    if (twins_per_sample < 1) fail("twins_per_sample", "must be at least 1");
    if (!(region_radius > 0.0 && region_radius <= 1.0)) fail("region_radius", "must lie in (0, 1]");
    if (k_f < 1) fail("k_f", "must be positive");
    if (!(mu >= 0.0)) fail("mu", "must be nonnegative");
    if (!(bump_width > 0.0)) fail("bump_width", "must be positive");
    if (!(gaussian_width >= 0.0)) fail("gaussian_width", "must be nonnegative");
    if (k_groups < 0) fail("k_groups", "must be 0 (sweep) or positive");
    if (threads < 0) fail("threads", "must be nonnegative");
    if (basis_k > 0 && k_f > basis_k) fail("k_f", "exceeds basis_k");
}

namespace {

Json config_to_object(const PipelineConfig& c) {
    Json j;
    j["mesh_path"] = c.mesh_path;
    j["basis_k"] = c.basis_k;
    j["samples"] = c.samples;
    j["wks_bands"] = c.wks_bands;
    j["wks_sigma_factor"] = c.wks_sigma_factor;
    j["t_wks_percentile"] = c.t_wks_percentile;
    j["eps"] = c.eps;
    j["min_support"] = c.min_support;
    j["twins_per_sample"] = c.twins_per_sample;
    j["canonicalize"] = c.canonicalize;
    j["region_radius"] = c.region_radius;
    j["k_f"] = c.k_f;
    j["mu"] = c.mu;
    j["bump_width"] = c.bump_width;
    j["gaussian_width"] = c.gaussian_width;
    j["k_groups"] = c.k_groups;
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    j["export_ply"] = c.export_ply;
    j["use_cache"] = c.use_cache;
    return j;
}

template <class T>
void take(const nlohmann::json& j, const char* key, T& field) {
    if (!j.contains(key)) return;
    try {
        field = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw Error(ErrorCode::InvalidSpec, std::string("config field ") + key + " has the wrong type");
    }
}

}  // namespace

void apply_config_json(PipelineConfig& c, const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidSpec, std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw Error(ErrorCode::InvalidSpec, "config must be a JSON object");
    const Json known = config_to_object(c);
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key) && key != "output_dir") {
            throw Error(ErrorCode::InvalidSpec, "unknown config field " + key);
        }
    }
    take(j, "mesh_path", c.mesh_path);
    take(j, "basis_k", c.basis_k);
    take(j, "samples", c.samples);
    take(j, "wks_bands", c.wks_bands);
    take(j, "wks_sigma_factor", c.wks_sigma_factor);
    take(j, "t_wks_percentile", c.t_wks_percentile);
    take(j, "eps", c.eps);
    take(j, "min_support", c.min_support);
    take(j, "twins_per_sample", c.twins_per_sample);
    take(j, "canonicalize", c.canonicalize);
    take(j, "region_radius", c.region_radius);
    take(j, "k_f", c.k_f);
    take(j, "mu", c.mu);
    take(j, "bump_width", c.bump_width);
    take(j, "gaussian_width", c.gaussian_width);
    take(j, "k_groups", c.k_groups);
    take(j, "seed", c.seed);
    take(j, "output_dir", c.output_dir);
    take(j, "threads", c.threads);
    take(j, "export_ply", c.export_ply);
    take(j, "use_cache", c.use_cache);
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::InvalidSpec, "cannot read config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    PipelineConfig c;
    apply_config_json(c, ss.str());
    return c;
}

std::string config_json(const PipelineConfig& cfg) { return config_to_object(cfg).dump(2) + "\n"; }

// ---------------------------------------------------------------- cache

Cache::Cache(std::string dir) : dir_(std::move(dir)) {}

Cache Cache::from_environment() {
    if (const char* d = std::getenv("ISYM_CACHE_DIR"); d && *d) return Cache(d);
    if (const char* x = std::getenv("XDG_CACHE_HOME"); x && *x) return Cache(std::string(x) + "/isym");
    if (const char* h = std::getenv("HOME"); h && *h) return Cache(std::string(h) + "/.cache/isym");
    return Cache(".isym_cache");
}

std::optional<SpectralBasis> Cache::load_basis(const std::string& mesh_hash, int k) const {
    SpectralBasis b;
    if (read_basis(dir_ + "/" + mesh_hash + "_k" + std::to_string(k) + ".basis", mesh_hash, k, b)) return b;
    return std::nullopt;
}

void Cache::store_basis(const SpectralBasis& basis, const std::string& mesh_hash, int k) const {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    const std::string path = dir_ + "/" + mesh_hash + "_k" + std::to_string(k) + ".basis";
    const std::string tmp = path + ".tmp" + std::to_string(::getpid());
    try {
        write_basis(basis, mesh_hash, tmp);
        fs::rename(tmp, path, ec);
    } catch (const Error& e) {
        warn("cache write failed: " + e.detail());
    }
    fs::remove(tmp, ec);
}

std::optional<RowMatrix> Cache::load_matrix(const std::string& key) const {
    RowMatrix m;
    if (read_matrix_blob(dir_ + "/" + key + ".mx", key, m)) return m;
    return std::nullopt;
}

void Cache::store_matrix(const RowMatrix& m, const std::string& key) const {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    const std::string path = dir_ + "/" + key + ".mx";
    const std::string tmp = path + ".tmp" + std::to_string(::getpid());
    try {
        write_matrix_blob(m, key, tmp);
        fs::rename(tmp, path, ec);
    } catch (const Error& e) {
        warn("cache write failed: " + e.detail());
    }
    fs::remove(tmp, ec);
}

void set_thread_count(int threads) {
    if (threads > 0) omp_set_num_threads(threads);
}

// ---------------------------------------------------------------- detection

namespace {

using Clock = std::chrono::steady_clock;

class StageClock {
public:
    explicit StageClock(StageTimings& t) : t_(t) {}

    template <class F>
    auto run(const char* step, double StageTimings::*column, F&& f) {
        const auto start = Clock::now();
        try {
            if constexpr (std::is_void_v<decltype(f())>) {
                f();
                record(step, column, start);
            } else {
                auto value = f();
                record(step, column, start);
                return value;
            }
        } catch (const Error& e) {
            throw Error(e.code(), std::string(step) + ": " + e.detail());
        }
    }

private:
    void record(const char* step, double StageTimings::*column, Clock::time_point start) {
        const double s = std::chrono::duration<double>(Clock::now() - start).count();
        t_.steps[step] += s;
        t_.*column += s;
    }
    StageTimings& t_;
};

std::string hex_key(const std::string& text) { return sha256_hex(text); }

std::string ids_digest(const std::vector<int>& ids) {
    return sha256_hex(std::string_view(reinterpret_cast<const char*>(ids.data()), ids.size() * sizeof(int)));
}

}  // namespace

DetectionResult run_detection(const TriangleMesh& mesh, const PipelineConfig& cfg, const Cache* cache) {
    cfg.validate();
    set_thread_count(cfg.threads);
    DetectionResult r;
    const auto start = Clock::now();
    StageClock clock(r.timings);
    const auto sink_guard = [&](const std::string& msg) { r.warnings.push_back(msg); };
    set_warning_sink(sink_guard);
    struct Restore {
        ~Restore() { set_warning_sink(nullptr); }
    } restore;

    const auto nv = mesh.vertex_count();
    r.mesh_hash = mesh.content_hash();
    r.basis_k = cfg.basis_k > 0 ? cfg.basis_k : default_basis_size(nv);
    if (cfg.k_f > r.basis_k) {
        throw Error(ErrorCode::InvalidSpec, "k_f " + std::to_string(cfg.k_f) + " exceeds basis size " +
                                                std::to_string(r.basis_k));
    }
    if (static_cast<std::size_t>(cfg.samples) > nv) {
        throw Error(ErrorCode::InvalidSpec, "more samples than vertices");
    }

    // distance: basis, sampling, all-pairs table
    std::optional<SpectralBasis> cached;
    if (cache) cached = cache->load_basis(r.mesh_hash, r.basis_k);
    r.cache_hits["basis"] = cached.has_value();
    if (cached) {
        r.basis = std::move(*cached);
    } else {
        const LaplacianPair lap = clock.run("laplacian", &StageTimings::distance, [&] { return build_laplacian(mesh); });
        r.basis = clock.run("eigensolve", &StageTimings::distance, [&] { return compute_eigenbasis(lap, r.basis_k); });
        if (cache) cache->store_basis(r.basis, r.mesh_hash, r.basis_k);
    }
    const BiharmonicEmbedding emb =
        clock.run("embedding", &StageTimings::distance, [&] { return BiharmonicEmbedding(r.basis); });
    r.samples = clock.run("sampling", &StageTimings::distance,
                          [&] { return farthest_point_sample(emb, cfg.samples, cfg.seed); });

    // extraction: descriptors and candidate pairs
    clock.run("wks", &StageTimings::extraction, [&] {
        const std::string key = hex_key("wks|" + r.mesh_hash + "|" + std::to_string(r.basis_k) + "|" +
                                        std::to_string(cfg.wks_bands) + "|" + std::to_string(cfg.wks_sigma_factor));
        const std::string meta_key = hex_key("wks-bands|" + key);
        if (cache) {
            auto sig = cache->load_matrix(key);
            auto meta = cache->load_matrix(meta_key);
            if (sig && meta && meta->cols() == cfg.wks_bands + 1 && sig->rows() == static_cast<Eigen::Index>(nv)) {
                r.wks.signatures = std::move(*sig);
                r.wks.energies = meta->row(0).head(cfg.wks_bands).transpose();
                r.wks.sigma = (*meta)(0, cfg.wks_bands);
                r.cache_hits["wks"] = true;
                return;
            }
        }
        r.cache_hits["wks"] = false;
        r.wks = compute_wks(r.basis, cfg.wks_bands, cfg.wks_sigma_factor);
        if (cache) {
            RowMatrix meta(1, cfg.wks_bands + 1);
            meta.row(0).head(cfg.wks_bands) = r.wks.energies.transpose();
            meta(0, cfg.wks_bands) = r.wks.sigma;
            cache->store_matrix(r.wks.signatures, key);
            cache->store_matrix(meta, meta_key);
        }
    });
    r.t_wks = clock.run("threshold", &StageTimings::extraction, [&] {
        return resolve_threshold(r.samples.vertex_ids, r.wks, WksThreshold::percentile(cfg.t_wks_percentile));
    });
    r.exclusion_radius = r.samples.coverage_radii.back();
    r.candidates = clock.run("twins", &StageTimings::extraction, [&] {
        return find_wks_twins(mesh, emb, r.wks, r.samples.vertex_ids, r.t_wks, r.exclusion_radius,
                              cfg.twins_per_sample);
    });
    r.voting_vertices = with_pair_endpoints(r.samples.vertex_ids, r.candidates);

    clock.run("distance_table", &StageTimings::distance, [&] {
        const std::string key = hex_key("table|" + r.mesh_hash + "|" + std::to_string(r.basis_k) + "|" +
                                        ids_digest(r.voting_vertices));
        if (cache) {
            if (auto rows = cache->load_matrix(key);
                rows && rows->rows() == static_cast<Eigen::Index>(r.voting_vertices.size()) &&
                rows->cols() == static_cast<Eigen::Index>(nv)) {
                r.table.sample_ids = r.voting_vertices;
                const int n = static_cast<int>(r.voting_vertices.size());
                r.table.distances.resize(n, n);
                for (int i = 0; i < n; ++i) {
                    for (int j = 0; j < n; ++j) r.table.distances(i, j) = (*rows)(i, r.voting_vertices[j]);
                    r.table.distances(i, i) = 0.0;
                }
                r.table.full_rows = std::move(*rows);
                r.cache_hits["table"] = true;
                return;
            }
        }
        r.cache_hits["table"] = false;
        r.table = all_pairs_biharmonic(emb, SampleSet{r.voting_vertices, {}}, true);
        if (cache) cache->store_matrix(r.table.full_rows, key);
    });

    if (r.candidates.empty()) {
        warn("no WKS twin pairs under the threshold; nothing to vote on");
    } else {
        r.pairs = clock.run("voting", &StageTimings::extraction,
                            [&] { return run_voting(r.candidates, r.table, cfg.eps, cfg.min_support); });
    }
    const DistanceRows rows(r.table, &emb);
    if (cfg.canonicalize && !r.pairs.empty()) {
        r.pairs = clock.run("orientation", &StageTimings::extraction,
                            [&] { return resolve_flip(r.pairs, rows, r.samples.vertex_ids.front()); });
    }
    r.clusters = clock.run("pair_clusters", &StageTimings::extraction,
                           [&] { return cluster_seed_pairs(r.pairs, r.table, cfg.eps); });

    // fmap: one map per pair cluster
    std::vector<Regions> regions = clock.run("regions", &StageTimings::extraction, [&] {
        std::vector<Regions> out;
        for (const auto& c : r.clusters) out.push_back(extract_regions(c, rows, cfg.region_radius));
        return out;
    });
    const MapOptions mopt{cfg.k_f, cfg.mu, cfg.bump_width};
    const int nc = static_cast<int>(r.clusters.size());
    std::vector<std::optional<FunctionalMap>> estimated(nc);
    std::vector<std::string> skipped(nc);
    clock.run("map_estimation", &StageTimings::fmap, [&] {
#pragma omp parallel for schedule(dynamic, 1)
        for (int c = 0; c < nc; ++c) {
            try {
                estimated[c] = estimate_map(r.basis, r.wks, r.clusters[c], regions[c], rows, mopt);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::RankDeficient) {
                    skipped[c] = std::string("!") + e.what();
                } else {
                    skipped[c] = e.detail();
                }
            }
        }
    });
    for (int c = 0; c < nc; ++c) {
        if (!skipped[c].empty() && skipped[c][0] == '!') {
            throw Error(ErrorCode::NumericalDegeneracy, "map_estimation: cluster " + std::to_string(c) + ": " +
                                                            skipped[c].substr(1));
        }
        if (estimated[c]) {
            r.maps.push_back(std::move(*estimated[c]));
            r.map_cluster.push_back(c);
        } else {
            warn("cluster " + std::to_string(c) + " (" + std::to_string(r.clusters[c].size()) +
                 " pairs) skipped: " + skipped[c]);
        }
    }

    clock.run("correspondence", &StageTimings::extraction, [&] {
        for (const auto& m : r.maps) r.correspondences.push_back(recover_correspondence(m, r.basis));
    });

    clock.run("grouping", &StageTimings::extraction, [&] {
        r.weights = build_weight_matrix(cfg.k_f, cfg.gaussian_width > 0.0 ? cfg.gaussian_width
                                                                          : default_gaussian_width(cfg.k_f));
        std::vector<Eigen::MatrixXd> cs;
        for (const auto& m : r.maps) cs.push_back(m.C);
        if (cs.empty()) return;
        ClusterOptions copt;
        copt.seed = cfg.seed;
        if (cfg.k_groups > 0) {
            copt.k_groups = cfg.k_groups;
            if (copt.k_groups > static_cast<int>(cs.size())) {
                warn("k_groups " + std::to_string(cfg.k_groups) + " exceeds the " + std::to_string(cs.size()) +
                     " maps; using one group per map");
                copt.k_groups = static_cast<int>(cs.size());
            }
            r.grouping = cluster_maps(cs, r.weights, copt);
        } else if (cs.size() >= 3) {
            r.grouping = cluster_maps_auto(cs, r.weights, copt);
        } else {
            copt.k_groups = 1;
            r.grouping = cluster_maps(cs, r.weights, copt);
        }
        r.k_groups = static_cast<int>(r.grouping.centroids.rows());
    });

    r.timings.total = std::chrono::duration<double>(Clock::now() - start).count();
    return r;
}

// ---------------------------------------------------------------- artifacts

namespace {

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

std::string samples_csv(const DetectionResult& r) {
    std::string out = "index,vertex,role,coverage_radius\n";
    char buf[128];
    for (std::size_t i = 0; i < r.voting_vertices.size(); ++i) {
        if (i < r.samples.vertex_ids.size()) {
            std::snprintf(buf, sizeof buf, "%zu,%d,sample,%.17g\n", i, r.voting_vertices[i], r.samples.coverage_radii[i]);
        } else {
            std::snprintf(buf, sizeof buf, "%zu,%d,twin,\n", i, r.voting_vertices[i]);
        }
        out += buf;
    }
    return out;
}

std::string map_name(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "map_%03zu", i);
    return buf;
}

}  // namespace

void write_artifacts(const TriangleMesh& mesh, const PipelineConfig& cfg, const DetectionResult& r) {
    const fs::path root(cfg.output_dir);
    std::error_code ec;
    fs::create_directories(root / "maps", ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + (root / "maps").string() + ": " + ec.message());

    std::map<std::string, std::string> files;  // relative path -> contents
    files["pairs.json"] = voted_pairs_json(r.pairs);
    files["samples.csv"] = samples_csv(r);
    for (std::size_t i = 0; i < r.maps.size(); ++i) {
        files["maps/" + map_name(i) + ".json"] = functional_map_json(r.maps[i]);
        files["maps/" + map_name(i) + "_correspondence.json"] = correspondence_json(r.correspondences[i]);
    }
    files["scores.csv"] = scores_csv(r.grouping.records);
    files["clusters.json"] = r.maps.empty() ? std::string("{\"k_groups\": 0, \"groups\": []}\n")
                                            : clusters_json(r.grouping);
    if (cfg.export_ply) {
        std::vector<int> roles(mesh.vertex_count(), -1);
        for (std::size_t i = 0; i < r.voting_vertices.size(); ++i) {
            roles[static_cast<std::size_t>(r.voting_vertices[i])] = i < r.samples.vertex_ids.size() ? 0 : 1;
        }
        files["samples.ply"] = to_colored_ply(mesh, LabelField{roles});
        for (std::size_t i = 0; i < r.maps.size(); ++i) {
            // Source vertices carry their distance to the first seed; matched
            // destinations inherit the value of their preimage.
            const BiharmonicEmbedding emb(r.basis);
            const std::vector<double> d = emb.distances_from(r.maps[i].seed_pairs.front().source);
            std::vector<double> value(mesh.vertex_count(), 0.0);
            for (const auto& [s, t] : r.correspondences[i].pairs) value[static_cast<std::size_t>(t)] = d[s];
            for (const auto& [s, t] : r.correspondences[i].pairs) value[static_cast<std::size_t>(s)] = d[s];
            files["maps/" + map_name(i) + ".ply"] = to_colored_ply(mesh, ScalarField{value});
        }
    }

    Json manifest;
    manifest["format"] = "isym-detect/1";
    const MeshStats st = mesh_stats(mesh);
    manifest["mesh"] = {{"path", cfg.mesh_path},
                        {"content_sha256", r.mesh_hash},
                        {"vertices", st.vertex_count},
                        {"faces", st.face_count},
                        {"surface_area", st.surface_area},
                        {"bounding_box_diagonal", st.bounding_box_diagonal}};
    manifest["config"] = nlohmann::ordered_json::parse(config_json(cfg));
    manifest["derived"] = {{"basis_k", r.basis_k},
                           {"t_wks", r.t_wks},
                           {"twin_exclusion_radius", r.exclusion_radius},
                           {"biharmonic_diameter", r.table.diameter()},
                           {"gaussian_width", r.weights.gaussian_width},
                           {"k_groups", r.k_groups},
                           {"flip_anchor", r.samples.vertex_ids.front()},
                           {"kernel", std::string(kernels::to_string(kernels::active().isa))}};
    manifest["counts"] = {{"samples", r.samples.vertex_ids.size()},
                          {"voting_vertices", r.voting_vertices.size()},
                          {"candidates", r.candidates.size()},
                          {"pairs", r.pairs.size()},
                          {"pair_clusters", r.clusters.size()},
                          {"maps", r.maps.size()}};
    manifest["warnings"] = r.warnings;
    Json hashes;
    for (const auto& [name, body] : files) hashes[name] = sha256_hex(body);
    manifest["artifacts"] = hashes;
    files["manifest.json"] = manifest.dump(2) + "\n";

    Json timings;
    Json steps;
    for (const auto& [k, v] : r.timings.steps) steps[k] = v;
    timings["stages"] = {{"distance", r.timings.distance},
                         {"fmap", r.timings.fmap},
                         {"extraction", r.timings.extraction},
                         {"total", r.timings.total}};
    timings["steps"] = steps;
    Json hits;
    for (const auto& [k, v] : r.cache_hits) hits[k] = v;
    timings["cache_hits"] = hits;
    files["timings.json"] = timings.dump(2) + "\n";

    for (const auto& [name, body] : files) write_text(root / name, body);
}

// ---------------------------------------------------------------- repeatability

double pair_overlap(const VotedPair& base, const VotedPair& other, const BiharmonicEmbedding& embedding,
                    double diameter) {
    const double straight = std::max(embedding.distance(base.source, other.source),
                                     embedding.distance(base.destination, other.destination));
    const double crossed = std::max(embedding.distance(base.source, other.destination),
                                    embedding.distance(base.destination, other.source));
    return 1.0 - std::min(straight, crossed) / diameter;
}

std::vector<double> default_overlap_grid() {
    std::vector<double> g;
    for (int i = 0; i <= 10; ++i) g.push_back(0.5 + 0.05 * i);
    return g;
}

RepeatabilityReport evaluate_repeatability(const TriangleMesh& mesh, const PipelineConfig& cfg,
                                           const Perturbation& perturbation, const std::vector<double>& overlaps,
                                           const Cache* cache) {
    RepeatabilityReport rep;
    rep.perturbation = perturbation;
    rep.overlaps = overlaps;
    const DetectionResult base = run_detection(mesh, cfg, cache);
    const TriangleMesh moved = perturb(mesh, perturbation, cfg.seed);
    const DetectionResult other = run_detection(moved, cfg, cache);
    rep.base_timings = base.timings;
    rep.perturbed_timings = other.timings;

    const BiharmonicEmbedding emb(base.basis);
    const double diameter = base.table.diameter();
    for (const VotedPair& p : base.pairs) {
        double best = -std::numeric_limits<double>::infinity();
        for (const VotedPair& q : other.pairs) best = std::max(best, pair_overlap(p, q, emb, diameter));
        rep.pair_overlap.push_back(best);
    }
    if (base.pairs.empty()) warn("repeatability: the base mesh produced no pairs");
    for (double o : overlaps) {
        const auto hit = std::count_if(rep.pair_overlap.begin(), rep.pair_overlap.end(),
                                       [&](double v) { return v >= o - 1e-12; });
        rep.repeatability.push_back(base.pairs.empty() ? 0.0 : static_cast<double>(hit) / base.pairs.size());
    }
    return rep;
}

std::string repeatability_csv(const RepeatabilityReport& report) {
    std::string out = "overlap,repeatability\n";
    char buf[96];
    for (std::size_t i = 0; i < report.overlaps.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.4f,%.17g\n", report.overlaps[i], report.repeatability[i]);
        out += buf;
    }
    return out;
}

std::string timings_table(const StageTimings& t) {
    std::string out;
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-12s %12s %10s\n", "stage", "seconds", "fraction");
    out += buf;
    const auto line = [&](const char* name, double s) {
        std::snprintf(buf, sizeof buf, "%-12s %12.4f %10.3f\n", name, s, t.total > 0.0 ? s / t.total : 0.0);
        out += buf;
    };
    line("distance", t.distance);
    line("fmap", t.fmap);
    line("extraction", t.extraction);
    line("total", t.total);
    return out;
}

}  // namespace isym
