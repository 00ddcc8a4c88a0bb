// Command-line driver for the symmetry detection pipeline.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "isym/error.hpp"
#include "isym/kernels.hpp"
#include "isym/mesh_io.hpp"
#include "isym/pipeline.hpp"
#include "isym/primitives.hpp"

namespace fs = std::filesystem;
using namespace isym;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

struct Overrides {
    std::string config_path;
    std::string mesh;
    std::string out;
    int basis_k = -1;
    int samples = -1;
    int wks_bands = -1;
    double sigma_factor = -1;
    double percentile = -1;
    double eps = -1;
    double min_support = -1;
    int twins = -1;
    double radius = -1;
    int k_f = -1;
    double mu = -1;
    double width = -1;
    int k_groups = -1;
    long long seed = -1;
    int threads = -1;
    bool no_flip = false;
    bool no_ply = false;
    bool no_cache = false;
};

void add_pipeline_flags(CLI::App* app, Overrides& o) {
    app->add_option("mesh", o.mesh, "Input mesh (OFF, OBJ or PLY)");
    app->add_option("--config", o.config_path, "JSON config; flags override its fields");
    app->add_option("-o,--out", o.out, "Output directory");
    app->add_option("-k,--basis-k", o.basis_k, "Eigenpairs (0: min(150, V-2))");
    app->add_option("-n,--samples", o.samples, "Farthest point samples");
    app->add_option("--wks-bands", o.wks_bands, "WKS band count");
    app->add_option("--wks-sigma", o.sigma_factor, "WKS band width in spacings");
    app->add_option("--t-wks", o.percentile, "WKS gate percentile");
    app->add_option("--eps", o.eps, "Vote tolerance, fraction of the diameter");
    app->add_option("--min-support", o.min_support, "Minimum support ratio");
    app->add_option("--twins", o.twins, "WKS twins per sample");
    app->add_option("--radius", o.radius, "Region radius, fraction of the diameter");
    app->add_option("--kf", o.k_f, "Functional map size");
    app->add_option("--mu", o.mu, "Commutativity weight");
    app->add_option("--gaussian-width", o.width, "Weight matrix width (0: k_f/10)");
    app->add_option("--groups", o.k_groups, "Symmetry groups (0: silhouette sweep)");
    app->add_option("--seed", o.seed, "Root seed");
    app->add_option("--threads", o.threads, "Worker threads (0: runtime default)");
    app->add_flag("--no-flip", o.no_flip, "Skip pair orientation canonicalization");
    app->add_flag("--no-ply", o.no_ply, "Skip colored PLY export");
    app->add_flag("--no-cache", o.no_cache, "Bypass the on-disk cache");
}

PipelineConfig resolve(const Overrides& o) {
    PipelineConfig c;
    if (!o.config_path.empty()) c = load_config(o.config_path);
    if (!o.mesh.empty()) c.mesh_path = o.mesh;
    if (!o.out.empty()) c.output_dir = o.out;
    if (o.basis_k >= 0) c.basis_k = o.basis_k;
    if (o.samples >= 0) c.samples = o.samples;
    if (o.wks_bands >= 0) c.wks_bands = o.wks_bands;
    if (o.sigma_factor >= 0) c.wks_sigma_factor = o.sigma_factor;
    if (o.percentile >= 0) c.t_wks_percentile = o.percentile;
    if (o.eps >= 0) c.eps = o.eps;
    if (o.min_support >= 0) c.min_support = o.min_support;
    if (o.twins >= 0) c.twins_per_sample = o.twins;
    if (o.radius >= 0) c.region_radius = o.radius;
    if (o.k_f >= 0) c.k_f = o.k_f;
    if (o.mu >= 0) c.mu = o.mu;
    if (o.width >= 0) c.gaussian_width = o.width;
    if (o.k_groups >= 0) c.k_groups = o.k_groups;
    if (o.seed >= 0) c.seed = static_cast<std::uint64_t>(o.seed);
    if (o.threads >= 0) c.threads = o.threads;
    if (o.no_flip) c.canonicalize = false;
    if (o.no_ply) c.export_ply = false;
    if (o.no_cache) c.use_cache = false;
    if (c.mesh_path.empty()) throw Error(ErrorCode::InvalidSpec, "no mesh given");
    c.validate();
    return c;
}

std::optional<Cache> cache_for(const PipelineConfig& c) {
    if (!c.use_cache) return std::nullopt;
    return Cache::from_environment();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out << text;
}

SpectralBasis basis_for(const TriangleMesh& mesh, int k, const std::optional<Cache>& cache) {
    const std::string hash = mesh.content_hash();
    if (cache) {
        if (auto b = cache->load_basis(hash, k)) return *b;
    }
    SpectralBasis b = compute_eigenbasis(build_laplacian(mesh), k);
    if (cache) cache->store_basis(b, hash, k);
    return b;
}

int cmd_info(const std::string& path) {
    const TriangleMesh mesh = load_mesh(path);
    const MeshStats s = mesh_stats(mesh);
    nlohmann::ordered_json j = {{"path", path},
                                {"content_sha256", mesh.content_hash()},
                                {"vertices", s.vertex_count},
                                {"faces", s.face_count},
                                {"edges", s.edge_count},
                                {"boundary_edges", s.boundary_edge_count},
                                {"euler_characteristic", s.euler_characteristic},
                                {"surface_area", s.surface_area},
                                {"bounding_box_diagonal", s.bounding_box_diagonal}};
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

int cmd_spectrum(const std::string& path, int k, const std::string& out, bool no_cache) {
    const TriangleMesh mesh = load_mesh(path);
    if (k <= 0) k = default_basis_size(mesh.vertex_count());
    const std::optional<Cache> cache = no_cache ? std::nullopt : std::optional<Cache>(Cache::from_environment());
    const SpectralBasis b = basis_for(mesh, k, cache);
    std::string csv = "index,eigenvalue\n";
    char buf[64];
    for (int i = 0; i < b.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%d,%.17g\n", i + 1, b.eigenvalues(i));
        csv += buf;
    }
    if (out.empty()) std::cout << csv;
    else write_file(out, csv);
    return kExitOk;
}

int cmd_sample(const std::string& path, int k, int n, std::uint64_t seed, const std::string& out, bool no_cache) {
    const TriangleMesh mesh = load_mesh(path);
    if (k <= 0) k = default_basis_size(mesh.vertex_count());
    const std::optional<Cache> cache = no_cache ? std::nullopt : std::optional<Cache>(Cache::from_environment());
    const SpectralBasis b = basis_for(mesh, k, cache);
    const SampleSet s = farthest_point_sample(BiharmonicEmbedding(b), n, seed);
    std::string csv = "index,vertex,coverage_radius\n";
    char buf[96];
    for (std::size_t i = 0; i < s.vertex_ids.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%d,%.17g\n", i, s.vertex_ids[i], s.coverage_radii[i]);
        csv += buf;
    }
    if (out.empty()) std::cout << csv;
    else write_file(out, csv);
    return kExitOk;
}

int cmd_detect(const Overrides& o) {
    const PipelineConfig c = resolve(o);
    const TriangleMesh mesh = load_mesh(c.mesh_path);
    const auto cache = cache_for(c);
    const DetectionResult r = run_detection(mesh, c, cache ? &*cache : nullptr);
    write_artifacts(mesh, c, r);
    std::printf("%zu pairs, %zu maps, %d groups -> %s\n", r.pairs.size(), r.maps.size(), r.k_groups,
                c.output_dir.c_str());
    for (const auto& w : r.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    return kExitOk;
}

std::vector<double> parse_grid(const std::string& spec) {
    if (spec.empty()) return default_overlap_grid();
    double lo = 0, hi = 0, step = 0;
    if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 || !(step > 0) || hi < lo) {
        throw Error(ErrorCode::InvalidSpec, "grid must look like lo:hi:step");
    }
    std::vector<double> g;
    for (int i = 0; lo + i * step <= hi + 1e-9; ++i) g.push_back(lo + i * step);
    return g;
}

int cmd_repeatability(const Overrides& o, const std::string& kind, double param, const std::string& grid) {
    PipelineConfig c = resolve(o);
    const TriangleMesh mesh = load_mesh(c.mesh_path);
    const auto cache = cache_for(c);
    const Perturbation p{parse_perturb_kind(kind), param};
    const RepeatabilityReport rep = evaluate_repeatability(mesh, c, p, parse_grid(grid), cache ? &*cache : nullptr);
    fs::create_directories(c.output_dir);
    write_file(c.output_dir + "/repeatability.csv", repeatability_csv(rep));
    nlohmann::ordered_json j;
    j["perturbation"] = {{"kind", to_string(p.kind)}, {"parameter", p.parameter}};
    j["overlaps"] = rep.overlaps;
    j["repeatability"] = rep.repeatability;
    j["pair_overlap"] = rep.pair_overlap;
    const auto stages = [](const StageTimings& t) {
        return nlohmann::ordered_json{
            {"distance", t.distance}, {"fmap", t.fmap}, {"extraction", t.extraction}, {"total", t.total}};
    };
    j["timings"] = {{"base", stages(rep.base_timings)}, {"perturbed", stages(rep.perturbed_timings)}};
    write_file(c.output_dir + "/repeatability.json", j.dump(2) + "\n");
    std::cout << repeatability_csv(rep);
    return kExitOk;
}

int cmd_perturb(const std::string& in, const std::string& out, const std::string& kind, double param,
                std::uint64_t seed) {
    const TriangleMesh mesh = load_mesh(in);
    save_mesh(perturb(mesh, {parse_perturb_kind(kind), param}, seed), out);
    return kExitOk;
}

int cmd_profile(const Overrides& o) {
    PipelineConfig c = resolve(o);
    const TriangleMesh mesh = load_mesh(c.mesh_path);
    const auto cache = cache_for(c);
    const DetectionResult r = run_detection(mesh, c, cache ? &*cache : nullptr);
    const StageTimings& t = r.timings;
    std::printf("vertices %zu, samples %d, basis %d, cache %s\n", mesh.vertex_count(), c.samples, r.basis_k,
                r.cache_hits.at("basis") ? "hit" : "miss");
    std::fputs(timings_table(t).c_str(), stdout);
    const bool big = c.samples >= 50 && mesh.vertex_count() >= 3000;
    const bool dominant = t.distance >= t.fmap && t.distance >= t.extraction;
    if (big) {
        std::printf("distance stage dominant: %s (%.1f%% of total)\n", dominant ? "yes" : "NO",
                    t.total > 0 ? 100.0 * t.distance / t.total : 0.0);
    }
    return kExitOk;
}

int cmd_fixture(const std::string& name, int subdivisions, const std::string& out, const std::string& symmetry_out) {
    const std::optional<Fixture> f = fixture_by_name(name, subdivisions);
    if (!f) throw Error(ErrorCode::InvalidArgument, "unknown fixture '" + name + "'");
    save_mesh(f->mesh, out);
    if (!symmetry_out.empty()) {
        nlohmann::ordered_json j;
        j["fixture"] = f->name;
        j["side_axis"] = f->side_axis;
        nlohmann::ordered_json syms = nlohmann::ordered_json::array();
        for (const auto& s : f->symmetries) syms.push_back({{"name", s.name}, {"permutation", s.permutation}});
        j["symmetries"] = syms;
        write_file(symmetry_out, j.dump() + "\n");
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Intrinsic symmetry detection and characterization on triangle meshes"};
    app.require_subcommand(1);
    std::string kernel;
    app.add_option("--kernel", kernel, "Force a kernel variant: scalar, avx2 or neon");

    std::string path, out;
    int k = 0, n = 50;
    long long seed = 42;
    bool no_cache = false;

    auto* info = app.add_subcommand("info", "Mesh statistics as JSON");
    info->add_option("mesh", path)->required();

    auto* spectrum = app.add_subcommand("spectrum", "Laplace-Beltrami eigenvalues as CSV");
    spectrum->add_option("mesh", path)->required();
    spectrum->add_option("-k", k, "Eigenpairs (0: min(150, V-2))");
    spectrum->add_option("-o,--out", out, "CSV path (default stdout)");
    spectrum->add_flag("--no-cache", no_cache);

    auto* sample = app.add_subcommand("sample", "Farthest point samples in biharmonic distance");
    sample->add_option("mesh", path)->required();
    sample->add_option("-k", k, "Eigenpairs (0: min(150, V-2))");
    sample->add_option("-n", n, "Sample count");
    sample->add_option("--seed", seed);
    sample->add_option("-o,--out", out, "CSV path (default stdout)");
    sample->add_flag("--no-cache", no_cache);

    Overrides detect_o, rep_o, prof_o;
    auto* detect = app.add_subcommand("detect", "Run the full pipeline and write artifacts");
    add_pipeline_flags(detect, detect_o);

    std::string kind = "noise", grid;
    double param = 0.005;
    auto* rep = app.add_subcommand("eval-repeatability", "Repeatability of detections under a perturbation");
    add_pipeline_flags(rep, rep_o);
    rep->add_option("--kind", kind, "noise, scale, micro_holes or isometry_bend");
    rep->add_option("--param", param, "Perturbation parameter");
    rep->add_option("--grid", grid, "Overlap grid lo:hi:step (default 0.5:1.0:0.05)");

    std::string pin, pout, pkind = "noise";
    double pparam = 0.005;
    long long pseed = 42;
    auto* pert = app.add_subcommand("perturb", "Write a perturbed copy of a mesh");
    pert->add_option("mesh", pin)->required();
    pert->add_option("-o,--out", pout)->required();
    pert->add_option("--kind", pkind, "noise, scale, micro_holes or isometry_bend");
    pert->add_option("--param", pparam, "Perturbation parameter");
    pert->add_option("--seed", pseed);

    auto* profile = app.add_subcommand("profile", "Per-stage timing table");
    add_pipeline_flags(profile, prof_o);

    std::string fname, sym_out;
    int subdiv = 4;
    auto* fixture = app.add_subcommand("fixture", "Write a synthetic test mesh");
    fixture->add_option("name", fname, "bilateral, quadruped, star, torso, sphere or cylinder")->required();
    fixture->add_option("-s,--subdivisions", subdiv);
    fixture->add_option("-o,--out", out)->required();
    fixture->add_option("--symmetries", sym_out, "Write ground-truth permutations as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (!kernel.empty()) {
            const auto isa = kernels::parse_isa(kernel);
            if (!isa) throw Error(ErrorCode::InvalidArgument, "unknown kernel '" + kernel + "'");
            kernels::select(*isa);
        }
        if (*info) return cmd_info(path);
        if (*spectrum) return cmd_spectrum(path, k, out, no_cache);
        if (*sample) return cmd_sample(path, k, n, static_cast<std::uint64_t>(seed), out, no_cache);
        if (*detect) return cmd_detect(detect_o);
        if (*rep) return cmd_repeatability(rep_o, kind, param, grid);
        if (*pert) return cmd_perturb(pin, pout, pkind, pparam, static_cast<std::uint64_t>(pseed));
        if (*profile) return cmd_profile(prof_o);
        if (*fixture) return cmd_fixture(fname, subdiv, out, sym_out);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return is_numerical(e.code()) ? kExitNumerical : kExitInput;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInput;
    }
    return kExitOk;
}
