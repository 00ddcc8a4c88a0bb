// Acceptance run: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "isym/descriptors.hpp"
#include "isym/error.hpp"
#include "isym/fmap.hpp"
#include "isym/log.hpp"
#include "isym/pipeline.hpp"
#include "isym/primitives.hpp"
#include "isym/spectral.hpp"
#include "isym/symmetry_space.hpp"
#include "isym/voting.hpp"

using namespace isym;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::vector<int> closed_samples(const BiharmonicEmbedding& e, const std::vector<int>& perm, int pairs, std::uint64_t seed) {
    const SampleSet s = farthest_point_sample(e, pairs * 3, seed);
    std::vector<int> out;
    for (int v : s.vertex_ids) {
        if (static_cast<int>(out.size()) >= 2 * pairs) break;
        if (perm[v] == v || std::find(out.begin(), out.end(), v) != out.end()) continue;
        out.push_back(v);
        out.push_back(perm[v]);
    }
    return out;
}

double one_ring_accuracy(const Correspondence& c, const TriangleMesh& mesh, const std::vector<int>& perm) {
    int good = 0;
    for (const auto& [a, b] : c.pairs) good += within_one_ring(mesh, perm[a], b);
    return c.pairs.empty() ? 0.0 : double(good) / c.pairs.size();
}

std::size_t best_map(const DetectionResult& r, const TriangleMesh& mesh, const std::vector<int>& perm) {
    std::size_t best = 0;
    for (std::size_t m = 1; m < r.correspondences.size(); ++m) {
        if (one_ring_accuracy(r.correspondences[m], mesh, perm) > one_ring_accuracy(r.correspondences[best], mesh, perm))
            best = m;
    }
    return best;
}

double max_edge_length(const TriangleMesh& m) {
    double e = 0.0;
    for (const Face& f : m.faces())
        for (int i = 0; i < 3; ++i) e = std::max(e, (m.vertex(f[i]) - m.vertex(f[(i + 1) % 3])).norm());
    return e;
}

// Correspondences whose destination lands on the source's own side.
int count_flips(const DetectionResult& r, const Fixture& fx, int* considered) {
    const double band = 2.0 * max_edge_length(fx.mesh);
    int flips = 0;
    *considered = 0;
    for (const auto& c : r.correspondences) {
        for (const auto& [a, b] : c.pairs) {
            const double xa = fx.mesh.vertex(a)(fx.side_axis), xb = fx.mesh.vertex(b)(fx.side_axis);
            if (std::abs(xa) <= band) continue;
            ++*considered;
            flips += (xa > 0) == (xb > 0) && std::abs(xb) > band;
        }
    }
    return flips;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path fresh_dir(const fs::path& root, const std::string& name) {
    const fs::path p = root / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

PipelineConfig base_config() {
    PipelineConfig cfg;
    cfg.export_ply = false;
    return cfg;
}

// Mirror detection shared by criteria 3 to 6.
struct MirrorRun {
    Fixture fx = bilateral_fixture(4);
    DetectionResult result;
    std::unique_ptr<BiharmonicEmbedding> embedding;
};

MirrorRun& mirror_run(const Cache& cache) {
    static MirrorRun run = [&] {
        MirrorRun r;
        r.result = run_detection(r.fx.mesh, base_config(), &cache);
        r.embedding = std::make_unique<BiharmonicEmbedding>(r.result.basis);
        return r;
    }();
    return run;
}

Outcome criterion1() {
    const auto t0 = Clock::now();
    const TriangleMesh m = icosphere(2);
    const LaplacianPair lap = build_laplacian(m);
    const SpectralBasis b = compute_eigenbasis(lap, 10);
    const double secs = seconds_since(t0);
    const double l1 = b.eigenvalues(0), l2 = b.eigenvalues(1);
    const double lo = b.eigenvalues.segment(1, 3).minCoeff(), hi = b.eigenvalues.segment(1, 3).maxCoeff();
    const double spread = hi / lo - 1.0;
    const double ortho = max_orthonormality_error(b), resid = max_eigen_residual(lap, b);
    const bool ok = l1 <= 1e-8 * l2 && spread <= 0.02 && ortho <= 1e-6 && resid <= 1e-6 && secs <= 5.0;
    return {ok, fmt("lambda1/lambda2=%.2e spread(l2..l4)=%.2e%% ortho=%.1e resid=%.1e time=%.2fs", l1 / l2,
                    100 * spread, ortho, resid, secs)};
}

Outcome criterion2() {
    const auto t0 = Clock::now();
    const TriangleMesh m = icosphere(2);
    const SpectralBasis b = compute_eigenbasis(build_laplacian(m), default_basis_size(m.vertex_count()));
    const BiharmonicEmbedding e(b);
    const SampleSet s = farthest_point_sample(e, 20, 42);
    const BiharmonicTable t = all_pairs_biharmonic(e, s);
    long checks = 0, failures = 0;
    for (int i = 0; i < 20; ++i) {
        ++checks;
        failures += t.distances(i, i) != 0.0;
        for (int j = 0; j < 20; ++j) {
            checks += 2;
            failures += t.distances(i, j) != t.distances(j, i);
            failures += i != j && !(t.distances(i, j) > 0.0);
            for (int k = 0; k < 20; ++k) {
                ++checks;
                failures += t.distances(i, k) > t.distances(i, j) + t.distances(j, k) + 1e-6;
            }
        }
    }
    const double secs = seconds_since(t0);
    return {failures == 0 && secs <= 2.0,
            fmt("%ld/%ld axiom checks pass (all ordered triples) time=%.2fs", checks - failures, checks, secs)};
}

Outcome criterion3(const Cache& cache) {
    MirrorRun& run = mirror_run(cache);
    const DetectionResult& r = run.result;
    const auto& perm = run.fx.symmetries[0].permutation;
    std::set<int> in_table(r.voting_vertices.begin(), r.voting_vertices.end());
    std::vector<CandidatePair> truth;
    int below_gate = 0;
    for (int v : r.voting_vertices) {
        if (v < perm[v] && in_table.count(perm[v])) {
            const double gap = wks_distance(r.wks, v, perm[v]);
            below_gate += gap <= r.t_wks;
            truth.push_back({v, perm[v], gap});
        }
    }
    if (truth.size() < 2) return {false, fmt("only %zu ground-truth pairs sampled", truth.size())};
    const auto voted = run_voting(truth, r.table, 0.02, 0.0);
    double worst = 1.0;
    for (const auto& v : voted) worst = std::min(worst, v.support_ratio);

    // the same pairs inside the full candidate list
    std::map<std::pair<int, int>, double> pipeline_support;
    for (const auto& c : run_voting(r.candidates, r.table, 0.02, 0.0))
        pipeline_support[{std::min(c.source, c.destination), std::max(c.source, c.destination)}] = c.support_ratio;
    double lo = 1.0, hi = 0.0;
    int listed = 0;
    for (const auto& c : truth) {
        const auto it = pipeline_support.find({c.a, c.b});
        if (it == pipeline_support.end()) continue;
        ++listed;
        lo = std::min(lo, it->second);
        hi = std::max(hi, it->second);
    }
    const bool ok = below_gate == static_cast<int>(truth.size()) && worst >= 0.9;
    return {ok, fmt("%zu exact pairs, %d pass the WKS gate, min support among them %.3f; in the full candidate list "
                    "(%zu candidates) %d of them score %.3f..%.3f",
                    truth.size(), below_gate, worst, r.candidates.size(), listed, listed ? lo : 0.0, hi)};
}

Outcome criterion4(const Cache& cache) {
    MirrorRun& run = mirror_run(cache);
    const DetectionResult& r = run.result;
    if (r.maps.empty()) return {false, "no maps"};
    const auto& perm = run.fx.symmetries[0].permutation;
    const std::size_t m = best_map(r, run.fx.mesh, perm);
    const Correspondence& c = r.correspondences[m];
    const double acc = one_ring_accuracy(c, run.fx.mesh, perm);
    std::mt19937_64 rng(7);
    std::vector<double> dev;
    for (int i = 0; i < 5000; ++i) {
        const auto& [p, tp] = c.pairs[rng() % c.pairs.size()];
        const auto& [q, tq] = c.pairs[rng() % c.pairs.size()];
        dev.push_back(std::abs(run.embedding->distance(p, q) - run.embedding->distance(tp, tq)) / r.table.diameter());
    }
    std::nth_element(dev.begin(), dev.begin() + dev.size() / 2, dev.end());
    const double med = dev[dev.size() / 2];
    return {acc >= 0.95 && med <= 0.02, fmt("map %zu of %zu: %.4f of %zu region vertices within one ring; median "
                                            "distance residual %.2e of diameter",
                                            m, r.maps.size(), acc, c.pairs.size(), med)};
}

// Mirror composed with a stretch of the polar direction, by nearest direction.
std::vector<int> stretch_map(const TriangleMesh& mesh) {
    const int nv = static_cast<int>(mesh.vertex_count());
    std::vector<Vec3> dirs(nv);
    for (int v = 0; v < nv; ++v) dirs[v] = mesh.vertex(v).normalized();
    std::vector<int> target(nv);
    for (int v = 0; v < nv; ++v) {
        const Vec3 u = Vec3(-dirs[v].x(), dirs[v].y(), 2.0 * dirs[v].z()).normalized();
        int best = 0;
        for (int w = 1; w < nv; ++w)
            if (dirs[w].dot(u) > dirs[best].dot(u)) best = w;
        target[v] = best;
    }
    return target;
}

Outcome criterion5(const Cache& cache) {
    MirrorRun& run = mirror_run(cache);
    const DetectionResult& r = run.result;
    if (r.maps.empty()) return {false, "no maps"};
    const int kf = r.maps[0].basis_size;
    const WeightMatrix& w = r.weights;
    const double identity = symmetry_score(Eigen::MatrixXd::Identity(kf, kf), w);
    const std::size_t m = best_map(r, run.fx.mesh, run.fx.symmetries[0].permutation);
    const double mirror = symmetry_score(r.maps[m].C, w);
    const double stretch = symmetry_score(pointwise_to_functional(r.basis, stretch_map(run.fx.mesh), kf), w);

    std::vector<SymmetryRecord> recs{{0, identity, {}}, {1, mirror, {}}, {2, stretch, {}}};
    for (const auto& rec : r.grouping.records) recs.push_back({3 + rec.map_id, rec.score, {}});
    int bad = 0, pairs = 0;
    for (const auto& a : recs) {
        for (const auto& b : recs) {
            ++pairs;
            const double d = symmetry_distance(a, b);
            bad += !(d >= 0.0) || d != symmetry_distance(b, a) || (a.map_id == b.map_id && d != 0.0);
        }
    }
    const bool ok = identity == 0.0 && mirror <= 0.1 && stretch > mirror && bad == 0;
    return {ok, fmt("identity %.3g, mirror %.3g, stretch %.3g; distance axioms hold on %d/%d ordered pairs", identity,
                    mirror, stretch, pairs - bad, pairs)};
}

Outcome criterion6(const Cache& cache) {
    MirrorRun& run = mirror_run(cache);
    int seen_on = 0, seen_off = 0;
    const int on = count_flips(run.result, run.fx, &seen_on);
    PipelineConfig cfg = base_config();
    cfg.canonicalize = false;
    const DetectionResult off_result = run_detection(run.fx.mesh, cfg, &cache);
    const int off = count_flips(off_result, run.fx, &seen_off);
    const bool ok = on == 0 && off > 0;
    return {ok, fmt("flips with canonicalization %d/%d, without %d/%d (delta %d)", on, seen_on, off, seen_off, off - on)};
}

Outcome criterion7() {
    const Fixture fx = star_fixture(4);
    const SpectralBasis basis = compute_eigenbasis(build_laplacian(fx.mesh), default_basis_size(fx.mesh.vertex_count()));
    const BiharmonicEmbedding emb(basis);
    const WksField wks = compute_wks(basis);
    std::vector<Eigen::MatrixXd> maps;
    std::vector<int> truth;
    for (std::size_t g = 0; g < fx.symmetries.size(); ++g) {
        const auto& perm = fx.symmetries[g].permutation;
        for (std::uint64_t seed : {11u, 12u, 13u, 14u}) {
            const std::vector<int> ids = closed_samples(emb, perm, 40, seed);
            const BiharmonicTable table = all_pairs_biharmonic(emb, SampleSet{ids, std::vector<double>(ids.size(), 0)});
            const DistanceRows rows(table, &emb);
            std::vector<VotedPair> seeds;
            for (int v : ids)
                if (v < perm[v]) seeds.push_back({v, perm[v], 0, 1.0, {}});
            const FunctionalMap fm = estimate_map(basis, wks, seeds, extract_regions(seeds, rows, 0.25), rows);
            maps.push_back(fm.C);
            truth.push_back(static_cast<int>(g));
        }
    }
    const WeightMatrix w = build_weight_matrix(40, default_gaussian_width(40));
    double worst = 1.0;
    bool stable = true;
    std::string scores;
    for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
        const ClusterResult a = cluster_maps(maps, w, {3, seed});
        const ClusterResult b = cluster_maps(maps, w, {3, seed});
        std::vector<int> la, lb;
        for (const auto& rec : a.records) la.push_back(*rec.cluster_label);
        for (const auto& rec : b.records) lb.push_back(*rec.cluster_label);
        stable = stable && la == lb && a.centroids == b.centroids;
        worst = std::min(worst, adjusted_rand_index(la, truth));
        if (seed == 1)
            for (double s : a.centroid_scores) scores += fmt(" %.3g", s);
    }
    return {worst == 1.0 && stable, fmt("%zu maps (4 per planted symmetry), min ARI over 5 seeds %.3f, repeat runs %s, "
                                        "centroid scores%s",
                                        maps.size(), worst, stable ? "identical" : "differ", scores.c_str())};
}

Outcome criterion8(const Cache& cache) {
    const auto t0 = Clock::now();
    const auto grid = default_overlap_grid();
    double worst = 1.0;
    std::string detail;
    for (const Fixture& fx : {bilateral_fixture(4), quadruped_fixture(4)}) {
        const RepeatabilityReport rep =
            evaluate_repeatability(fx.mesh, base_config(), {PerturbKind::Noise, 0.005}, grid, &cache);
        double lo = 1.0;
        for (std::size_t i = 0; i < grid.size(); ++i)
            if (grid[i] <= 0.75 + 1e-9) lo = std::min(lo, rep.repeatability[i]);
        worst = std::min(worst, lo);
        detail += fmt("%s min %.3f (at 1.0: %.3f); ", fx.name.c_str(), lo, rep.repeatability.back());
    }
    const double secs = seconds_since(t0);
    return {worst >= 0.8 && secs <= 120.0, detail + fmt("time=%.1fs", secs)};
}

Outcome criterion9() {
    const Fixture fx = torso_fixture();
    PipelineConfig cfg = base_config();
    cfg.samples = 50;
    const DetectionResult r = run_detection(fx.mesh, cfg, nullptr);
    const StageTimings& t = r.timings;
    const bool largest = t.distance >= t.fmap && t.distance >= t.extraction;
    return {largest && t.total <= 60.0,
            fmt("V=%zu n=50, %zu pairs, %zu maps: distance %.2fs (%.0f%%), map estimation %.2fs, extraction %.2fs, "
                "total %.2fs",
                fx.mesh.vertex_count(), r.pairs.size(), r.maps.size(), t.distance, 100 * t.distance / t.total, t.fmap,
                t.extraction, t.total)};
}

Outcome criterion10(const fs::path& work) {
    const Fixture fx = bilateral_fixture(4);
    const Cache cache(fresh_dir(work, "c10_cache").string());
    PipelineConfig a = base_config(), b = base_config();
    a.export_ply = b.export_ply = true;
    a.output_dir = fresh_dir(work, "c10_a").string();
    b.output_dir = fresh_dir(work, "c10_b").string();
    write_artifacts(fx.mesh, a, run_detection(fx.mesh, a, &cache));
    write_artifacts(fx.mesh, b, run_detection(fx.mesh, b, &cache));
    int same = 0, differ = 0;
    for (const auto& e : fs::recursive_directory_iterator(a.output_dir)) {
        if (!e.is_regular_file() || e.path().filename() == "timings.json") continue;
        const fs::path other = fs::path(b.output_dir) / fs::relative(e.path(), a.output_dir);
        (fs::exists(other) && slurp(e.path()) == slurp(other) ? same : differ)++;
    }
    int extra = 0;
    for (const auto& e : fs::recursive_directory_iterator(b.output_dir))
        extra += e.is_regular_file() && !fs::exists(fs::path(a.output_dir) / fs::relative(e.path(), b.output_dir));
    return {differ == 0 && extra == 0 && same > 0,
            fmt("%d files identical, %d differ, %d unmatched (cold then warm cache; timings.json holds wall times and "
                "is not compared)",
                same, differ, extra)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    std::vector<int> expected_failures, only;
    std::string work = (fs::temp_directory_path() / "isym_acceptance").string(), report_path;
    app.add_option("--expect-fail", expected_failures, "Criteria known to fail; reported, not counted");
    app.add_option("--only", only, "Run just these criteria");
    app.add_option("--work", work, "Scratch directory");
    app.add_option("--report", report_path, "Also write the result lines to this file");
    CLI11_PARSE(app, argc, argv);

    set_warning_sink([](const std::string&) {});
    fs::create_directories(work);
    const Cache cache(fresh_dir(work, "cache").string());

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"spectral correctness", criterion1},
        {"biharmonic metric axioms", criterion2},
        {"vote necessity", [&] { return criterion3(cache); }},
        {"map fidelity", [&] { return criterion4(cache); }},
        {"characterization ordering", [&] { return criterion5(cache); }},
        {"flip resolution", [&] { return criterion6(cache); }},
        {"symmetry groups", criterion7},
        {"repeatability under noise", [&] { return criterion8(cache); }},
        {"performance shape", criterion9},
        {"determinism", [&] { return criterion10(work); }},
    };

    std::ofstream report;
    if (!report_path.empty()) report.open(report_path);
    int unexpected = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
        Outcome o;
        const auto t0 = Clock::now();
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const bool known = std::find(expected_failures.begin(), expected_failures.end(), id) != expected_failures.end();
        const std::string line =
            fmt("%s criterion %d (%s): ", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str()) + o.detail +
            fmt(" [%.1fs]%s\n", seconds_since(t0),
                o.pass ? (known ? " (listed as expected failure)" : "") : (known ? " (expected failure)" : ""));
        std::fputs(line.c_str(), stdout);
        std::fflush(stdout);
        if (report) report << line << std::flush;
        unexpected += !o.pass && !known;
    }
    return unexpected == 0 ? 0 : 1;
}
