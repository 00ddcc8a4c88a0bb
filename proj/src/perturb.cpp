#include "isym/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "isym/error.hpp"

namespace isym {

namespace {

std::vector<Face> face_list(const TriangleMesh& mesh) { return {mesh.faces().begin(), mesh.faces().end()}; }

// Box-Muller on raw 53-bit draws, so the stream is identical everywhere.
class Gaussian {
public:
    explicit Gaussian(std::uint64_t seed) : rng_(seed) {}
    double operator()() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u = 0.0;
        while (u == 0.0) u = uniform();
        const double v = uniform();
        const double r = std::sqrt(-2.0 * std::log(u));
        spare_ = r * std::sin(2.0 * std::numbers::pi * v);
        has_spare_ = true;
        return r * std::cos(2.0 * std::numbers::pi * v);
    }

private:
    double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
    std::mt19937_64 rng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

TriangleMesh noise(const TriangleMesh& mesh, double sigma_fraction, std::uint64_t seed) {
    if (!(sigma_fraction >= 0.0)) throw Error(ErrorCode::InvalidArgument, "noise sigma must be nonnegative");
    if (sigma_fraction == 0.0) return mesh;
    const double sigma = sigma_fraction * mesh.bounding_box_diagonal();
    Gaussian g(seed);
    std::vector<Vec3> v(mesh.vertices().begin(), mesh.vertices().end());
    for (Vec3& p : v) {
        const double dx = g(), dy = g(), dz = g();
        p += sigma * Vec3(dx, dy, dz);
    }
    return TriangleMesh::create(std::move(v), face_list(mesh));
}

TriangleMesh scale(const TriangleMesh& mesh, double s) {
    if (!(s > 0.0) || !std::isfinite(s)) throw Error(ErrorCode::InvalidArgument, "scale factor must be positive");
    std::vector<Vec3> v(mesh.vertices().begin(), mesh.vertices().end());
    for (Vec3& p : v) p *= s;
    return TriangleMesh::create(std::move(v), face_list(mesh));
}

TriangleMesh micro_holes(const TriangleMesh& mesh, double count_param, std::uint64_t seed) {
    if (!(count_param >= 0.0) || count_param != std::floor(count_param)) {
        throw Error(ErrorCode::InvalidArgument, "hole count must be a nonnegative integer");
    }
    const auto count = static_cast<std::size_t>(count_param);
    const std::size_t nf = mesh.face_count();
    if (count == 0) return mesh;
    std::vector<std::size_t> order(nf);
    for (std::size_t i = 0; i < nf; ++i) order[i] = i;
    std::mt19937_64 rng(seed);
    for (std::size_t i = nf - 1; i > 0; --i) std::swap(order[i], order[rng() % (i + 1)]);

    // Faces touching a used vertex or an existing boundary are skipped, so
    // every hole is a separate triangle.
    std::vector<char> used(mesh.vertex_count(), 0);
    std::vector<char> removed(nf, 0);
    std::size_t taken = 0;
    for (std::size_t f : order) {
        if (taken == count) break;
        const Face& t = mesh.face(static_cast<int>(f));
        if (used[t[0]] || used[t[1]] || used[t[2]]) continue;
        removed[f] = 1;
        for (int c = 0; c < 3; ++c) {
            used[t[c]] = 1;
            for (int n : mesh.neighbors(t[c])) used[n] = 1;
        }
        ++taken;
    }
    if (taken < count) throw Error(ErrorCode::InvalidArgument, "mesh too small for the requested hole count");
    std::vector<Face> faces;
    for (std::size_t f = 0; f < nf; ++f) {
        if (!removed[f]) faces.push_back(mesh.face(static_cast<int>(f)));
    }
    return TriangleMesh::create(std::vector<Vec3>(mesh.vertices().begin(), mesh.vertices().end()), std::move(faces));
}

TriangleMesh bend(const TriangleMesh& mesh, double degrees) {
    if (!std::isfinite(degrees) || std::abs(degrees) > 180.0) {
        throw Error(ErrorCode::InvalidArgument, "bend angle must lie in [-180, 180] degrees");
    }
    Vec3 lo = mesh.vertex(0), hi = mesh.vertex(0);
    for (const Vec3& p : mesh.vertices()) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    const double z0 = 0.5 * (lo.z() + hi.z());
    const double band = 0.1 * (hi.z() - lo.z());
    const double y0 = 0.5 * (lo.y() + hi.y());
    const double angle = degrees * std::numbers::pi / 180.0;
    std::vector<Vec3> v(mesh.vertices().begin(), mesh.vertices().end());
    for (Vec3& p : v) {
        const double t = std::clamp((p.z() - z0 + 0.5 * band) / band, 0.0, 1.0);
        const double w = t * t * (3.0 - 2.0 * t);
        if (w == 0.0) continue;
        const double a = w * angle;
        const double y = p.y() - y0;
        const double z = p.z() - z0;
        p.y() = y0 + std::cos(a) * y - std::sin(a) * z;
        p.z() = z0 + std::sin(a) * y + std::cos(a) * z;
    }
    return TriangleMesh::create(std::move(v), face_list(mesh));
}

}  // namespace

std::string to_string(PerturbKind kind) {
    switch (kind) {
        case PerturbKind::Noise: return "noise";
        case PerturbKind::Scale: return "scale";
        case PerturbKind::MicroHoles: return "micro_holes";
        case PerturbKind::IsometryBend: return "isometry_bend";
    }
    return "unknown";
}

PerturbKind parse_perturb_kind(const std::string& name) {
    if (name == "noise") return PerturbKind::Noise;
    if (name == "scale") return PerturbKind::Scale;
    if (name == "micro_holes") return PerturbKind::MicroHoles;
    if (name == "isometry_bend") return PerturbKind::IsometryBend;
    throw Error(ErrorCode::InvalidArgument, "unknown perturbation '" + name + "'");
}

TriangleMesh perturb(const TriangleMesh& mesh, const Perturbation& p, std::uint64_t seed) {
    switch (p.kind) {
        case PerturbKind::Noise: return noise(mesh, p.parameter, seed);
        case PerturbKind::Scale: return scale(mesh, p.parameter);
        case PerturbKind::MicroHoles: return micro_holes(mesh, p.parameter, seed);
        case PerturbKind::IsometryBend: return bend(mesh, p.parameter);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown perturbation");
}

}  // namespace isym
