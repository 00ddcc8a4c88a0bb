#include "isym/primitives.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <unordered_map>

#include "isym/error.hpp"

namespace isym {
namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorCode::InvalidSpec, what);
}

struct SphereMesh {
    std::vector<Vec3> vertices;
    std::vector<Face> faces;
};

SphereMesh build_icosphere(int subdivisions) {
    const double t = std::numbers::phi;
    SphereMesh m;
    m.vertices = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                  {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
    for (Vec3& v : m.vertices) v /= v.norm();
    m.faces = {{0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
               {11, 10, 2}, {10, 7, 6}, {7, 1, 8}, {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8},
               {3, 8, 9}, {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};
    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            if (auto it = midpoint.find(key); it != midpoint.end()) return it->second;
            Vec3 p = (m.vertices[static_cast<std::size_t>(a)] + m.vertices[static_cast<std::size_t>(b)]) * 0.5;
            p /= p.norm();
            m.vertices.push_back(p);
            const int id = static_cast<int>(m.vertices.size()) - 1;
            midpoint.emplace(key, id);
            return id;
        };
        std::vector<Face> next;
        next.reserve(m.faces.size() * 4);
        for (const Face& f : m.faces) {
            const int ab = mid(f[0], f[1]);
            const int bc = mid(f[1], f[2]);
            const int ca = mid(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        m.faces = std::move(next);
    }
    return m;
}

struct ExactKey {
    std::uint64_t x, y, z;
    bool operator==(const ExactKey&) const = default;
};

struct ExactKeyHash {
    std::size_t operator()(const ExactKey& k) const {
        return std::hash<std::uint64_t>()(k.x * 0x9E3779B97F4A7C15ull ^ (k.y + 0x632BE59BD9B4E019ull) ^ (k.z << 1));
    }
};

ExactKey exact_key(const Vec3& p) {
    // +0 and -0 must collide.
    auto bits = [](double v) { return std::bit_cast<std::uint64_t>(v == 0.0 ? 0.0 : v); };
    return {bits(p.x()), bits(p.y()), bits(p.z())};
}

}  // namespace

TriangleMesh icosphere(int subdivisions) {
    require(subdivisions >= 0 && subdivisions <= 7, "icosphere subdivisions must be in [0, 7]");
    auto m = build_icosphere(subdivisions);
    return TriangleMesh::create(std::move(m.vertices), std::move(m.faces));
}

TriangleMesh cylinder(int segments, int rings) {
    require(segments >= 3, "cylinder needs at least 3 segments");
    require(rings >= 2, "cylinder needs at least 2 rings");
    std::vector<Vec3> vertices;
    std::vector<Face> faces;
    // With segments divisible by 4 every ring point comes from one
    // half-quadrant table, so the coordinate mirrors are exact.
    std::vector<std::pair<double, double>> ring(static_cast<std::size_t>(segments));
    const int q = segments / 4;
    for (int s = 0; s < segments; ++s) {
        if (segments % 4 != 0) {
            const double a = 2.0 * std::numbers::pi * s / segments;
            ring[s] = {std::cos(a), std::sin(a)};
            continue;
        }
        const int k = s / q, j = s % q;
        const int jj = 2 * j <= q ? j : q - j;
        const double a = 2.0 * std::numbers::pi * jj / segments;
        double c = std::cos(a), sn = std::sin(a);
        if (jj != j) std::swap(c, sn);
        const std::pair<double, double> turns[4] = {{c, sn}, {-sn, c}, {-c, -sn}, {sn, -c}};
        ring[s] = turns[k];
    }
    for (int r = 0; r < rings; ++r) {
        const double z = static_cast<double>(2 * r - (rings - 1)) / (rings - 1);
        for (int s = 0; s < segments; ++s) vertices.emplace_back(ring[s].first, ring[s].second, z);
    }
    auto id = [segments](int r, int s) { return r * segments + (s % segments); };
    for (int r = 0; r + 1 < rings; ++r) {
        for (int s = 0; s < segments; ++s) {
            faces.push_back({id(r, s), id(r, s + 1), id(r + 1, s + 1)});
            faces.push_back({id(r, s), id(r + 1, s + 1), id(r + 1, s)});
        }
    }
    const int bottom = static_cast<int>(vertices.size());
    vertices.emplace_back(0.0, 0.0, -1.0);
    const int top = bottom + 1;
    vertices.emplace_back(0.0, 0.0, 1.0);
    for (int s = 0; s < segments; ++s) {
        faces.push_back({bottom, id(0, s + 1), id(0, s)});
        faces.push_back({top, id(rings - 1, s), id(rings - 1, s + 1)});
    }
    return TriangleMesh::create(std::move(vertices), std::move(faces));
}

TriangleMesh grid_square(int nx, int ny) {
    require(nx >= 1 && ny >= 1, "grid needs positive cell counts");
    std::vector<Vec3> vertices;
    std::vector<Face> faces;
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) vertices.emplace_back(double(i) / nx, double(j) / ny, 0.0);
    }
    auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            faces.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            faces.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    return TriangleMesh::create(std::move(vertices), std::move(faces));
}

TriangleMesh mirrored_composite(const CompositeSpec& spec) {
    require(spec.subdivisions >= 1 && spec.subdivisions <= 7, "composite subdivisions must be in [1, 7]");
    require(!spec.mirror_axes.empty(), "composite needs at least one mirror plane");
    for (int axis : spec.mirror_axes) require(axis >= 0 && axis <= 2, "mirror axis must be 0, 1 or 2");
    std::vector<Vec3> dirs;
    for (const Part& p : spec.parts) {
        require(p.direction.norm() > 0.0, "part direction must be nonzero");
        require(p.width > 0.0 && p.length >= 0.0, "part width must be positive and length nonnegative");
        dirs.push_back(p.direction.normalized());
    }
    auto m = build_icosphere(spec.subdivisions);
    for (Vec3& v : m.vertices) {
        Vec3 folded = v;
        for (int axis : spec.mirror_axes) folded[axis] = std::abs(folded[axis]);
        double r = 1.0;
        for (std::size_t i = 0; i < spec.parts.size(); ++i) {
            const double theta = std::acos(std::clamp(folded.dot(dirs[i]), -1.0, 1.0));
            const double w = spec.parts[i].width;
            r += spec.parts[i].length * std::exp(-theta * theta / (2.0 * w * w));
        }
        v *= r;
    }
    return TriangleMesh::create(std::move(m.vertices), std::move(m.faces));
}

std::optional<std::vector<int>> reflection_permutation(const TriangleMesh& mesh, int axis) {
    std::unordered_map<ExactKey, int, ExactKeyHash> index;
    const auto verts = mesh.vertices();
    for (int v = 0; v < static_cast<int>(verts.size()); ++v) index.emplace(exact_key(verts[static_cast<std::size_t>(v)]), v);
    std::vector<int> perm(verts.size());
    for (int v = 0; v < static_cast<int>(verts.size()); ++v) {
        Vec3 p = verts[static_cast<std::size_t>(v)];
        p[axis] = -p[axis];
        auto it = index.find(exact_key(p));
        if (it == index.end()) return std::nullopt;
        perm[static_cast<std::size_t>(v)] = it->second;
    }
    return perm;
}

std::vector<int> compose(const std::vector<int>& p1, const std::vector<int>& p2) {
    std::vector<int> out(p1.size());
    for (std::size_t v = 0; v < p1.size(); ++v) out[v] = p2[static_cast<std::size_t>(p1[v])];
    return out;
}

namespace {

Fixture make_fixture(std::string name, const CompositeSpec& spec,
                     const std::vector<std::pair<std::string, std::vector<int>>>& axis_sets, int side_axis) {
    Fixture fx{std::move(name), mirrored_composite(spec), {}, side_axis};
    for (const auto& [sym_name, axes] : axis_sets) {
        std::vector<int> perm(fx.mesh.vertex_count());
        for (std::size_t v = 0; v < perm.size(); ++v) perm[v] = static_cast<int>(v);
        for (int axis : axes) perm = compose(perm, *reflection_permutation(fx.mesh, axis));
        fx.symmetries.push_back({sym_name, std::move(perm)});
    }
    return fx;
}

}  // namespace

Fixture bilateral_fixture(int subdivisions) {
    CompositeSpec spec;
    spec.subdivisions = subdivisions;
    spec.mirror_axes = {0};
    spec.parts = {
        {Vec3(0.7, 0.5, 0.3), 0.6, 0.25},
        {Vec3(0.5, -0.6, 0.4), 0.4, 0.3},
        {Vec3(0.4, 0.1, -0.8), 0.5, 0.2},
        {Vec3(0.0, 0.9, -0.3), 0.3, 0.35},
    };
    return make_fixture("bilateral", spec, {{"mirror", {0}}}, 0);
}

Fixture quadruped_fixture(int subdivisions) {
    CompositeSpec spec;
    spec.subdivisions = subdivisions;
    spec.mirror_axes = {0};
    spec.parts = {
        {Vec3(0.0, 0.5, 0.85), 0.5, 0.3},      // head
        {Vec3(0.0, 0.2, -1.0), 0.7, 0.12},     // tail
        {Vec3(0.45, -0.7, 0.55), 1.0, 0.16},   // front legs
        {Vec3(0.45, -0.7, -0.55), 0.85, 0.18}, // hind legs
    };
    return make_fixture("quadruped", spec, {{"mirror", {0}}}, 0);
}

Fixture star_fixture(int subdivisions) {
    CompositeSpec spec;
    spec.subdivisions = subdivisions;
    spec.mirror_axes = {1, 2};
    spec.parts = {
        {Vec3(1.0, 0.0, 0.0), 1.2, 0.25},
        {Vec3(-0.5, std::sqrt(3.0) / 2.0, 0.0), 0.9, 0.22},
    };
    return make_fixture("star", spec, {{"mirror", {1}}, {"front_back", {2}}, {"rotation", {1, 2}}}, 1);
}

Fixture torso_fixture() {
    const TriangleMesh base = cylinder(68, 50);
    struct Bump {
        Vec3 centre;
        double height, width;
    };
    const Bump bumps[] = {
        {Vec3(0.7, 0.7, 0.5), 0.6, 0.3},
        {Vec3(1.0, 0.0, -0.4), 0.4, 0.35},
        {Vec3(0.3, -0.95, 0.1), 0.3, 0.25},
        {Vec3(0.5, 0.85, -0.8), 0.25, 0.2},
    };
    std::vector<Vec3> vertices;
    for (const Vec3& v : base.vertices()) {
        const Vec3 folded(std::abs(v.x()), v.y(), v.z());
        double r = 1.0;
        for (const Bump& b : bumps) r += b.height * std::exp(-(folded - b.centre).squaredNorm() / (2.0 * b.width * b.width));
        vertices.emplace_back(r * v.x(), r * v.y(), v.z());
    }
    Fixture fx{"torso", TriangleMesh::create(std::move(vertices), {base.faces().begin(), base.faces().end()}), {}, 0};
    fx.symmetries.push_back({"mirror", *reflection_permutation(fx.mesh, 0)});
    return fx;
}

std::optional<Fixture> fixture_by_name(const std::string& name, int subdivisions) {
    if (name == "bilateral") return bilateral_fixture(subdivisions);
    if (name == "quadruped") return quadruped_fixture(subdivisions);
    if (name == "star") return star_fixture(subdivisions);
    if (name == "torso") return torso_fixture();
    if (name == "sphere" || name == "cylinder") {
        Fixture fx{name, name == "sphere" ? icosphere(subdivisions) : cylinder(68, 50), {}, 0};
        for (int axis = 0; axis < 3; ++axis) {
            if (auto perm = reflection_permutation(fx.mesh, axis)) {
                fx.symmetries.push_back({std::string("mirror_") + "xyz"[axis], std::move(*perm)});
            }
        }
        return fx;
    }
    return std::nullopt;
}

}  // namespace isym
