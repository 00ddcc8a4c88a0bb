#include "isym/mesh.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <utility>

#include "isym/error.hpp"
#include "isym/hash.hpp"

namespace isym {
namespace {

using EdgeKey = std::pair<int, int>;

EdgeKey edge_key(int a, int b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
    return 0.5 * (b - a).cross(c - a).norm();
}

double bbox_diagonal(std::span<const Vec3> vertices) {
    if (vertices.empty()) return 0.0;
    Vec3 lo = vertices.front();
    Vec3 hi = vertices.front();
    for (const Vec3& p : vertices) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    return (hi - lo).norm();
}

// Edge -> incident faces, in face order.
std::map<EdgeKey, std::vector<int>> edge_faces(std::span<const Face> faces) {
    std::map<EdgeKey, std::vector<int>> out;
    for (int f = 0; f < static_cast<int>(faces.size()); ++f) {
        const Face& t = faces[static_cast<std::size_t>(f)];
        for (int c = 0; c < 3; ++c) out[edge_key(t[c], t[(c + 1) % 3])].push_back(f);
    }
    return out;
}

// +1 if face contains directed edge a->b, -1 if b->a.
int edge_direction(const Face& t, int a, int b) {
    for (int c = 0; c < 3; ++c) {
        if (t[c] == a && t[(c + 1) % 3] == b) return 1;
        if (t[c] == b && t[(c + 1) % 3] == a) return -1;
    }
    return 0;
}

void orient_consistently(std::vector<Face>& faces, const std::map<EdgeKey, std::vector<int>>& edges) {
    const std::size_t nf = faces.size();
    std::vector<std::vector<std::pair<int, EdgeKey>>> face_nbrs(nf);
    for (const auto& [key, incident] : edges) {
        if (incident.size() == 2) {
            face_nbrs[static_cast<std::size_t>(incident[0])].push_back({incident[1], key});
            face_nbrs[static_cast<std::size_t>(incident[1])].push_back({incident[0], key});
        }
    }
    std::vector<char> visited(nf, 0);
    std::vector<int> queue;
    for (std::size_t seed = 0; seed < nf; ++seed) {
        if (visited[seed]) continue;
        visited[seed] = 1;
        queue.assign(1, static_cast<int>(seed));
        for (std::size_t qi = 0; qi < queue.size(); ++qi) {
            const int f = queue[qi];
            for (const auto& [g, key] : face_nbrs[static_cast<std::size_t>(f)]) {
                const int df = edge_direction(faces[static_cast<std::size_t>(f)], key.first, key.second);
                int dg = edge_direction(faces[static_cast<std::size_t>(g)], key.first, key.second);
                if (!visited[static_cast<std::size_t>(g)]) {
                    if (df == dg) {
                        std::swap(faces[static_cast<std::size_t>(g)][1], faces[static_cast<std::size_t>(g)][2]);
                    }
                    visited[static_cast<std::size_t>(g)] = 1;
                    queue.push_back(g);
                } else if (df == dg) {
                    throw Error(ErrorCode::NonManifold,
                                "surface is not orientable (faces " + std::to_string(f) + " and " +
                                    std::to_string(g) + ")");
                }
            }
        }
    }
}

}  // namespace

TriangleMesh TriangleMesh::create(std::vector<Vec3> vertices, std::vector<Face> faces) {
    const int nv = static_cast<int>(vertices.size());
    if (nv < 3 || faces.empty()) {
        throw Error(ErrorCode::ParseError, "mesh needs at least 3 vertices and 1 face");
    }
    for (const Vec3& p : vertices) {
        if (!p.allFinite()) throw Error(ErrorCode::ParseError, "non-finite vertex coordinate");
    }
    for (std::size_t f = 0; f < faces.size(); ++f) {
        for (int idx : faces[f]) {
            if (idx < 0 || idx >= nv) {
                throw Error(ErrorCode::ParseError, "face " + std::to_string(f) + " references vertex " +
                                                       std::to_string(idx) + " of " + std::to_string(nv));
            }
        }
    }
    const double diag = bbox_diagonal(vertices);
    const double min_area = 1e-12 * diag * diag;
    for (std::size_t f = 0; f < faces.size(); ++f) {
        const Face& t = faces[f];
        if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
            throw Error(ErrorCode::DegenerateFace, "face " + std::to_string(f) + " repeats a vertex");
        }
        const double area = triangle_area(vertices[static_cast<std::size_t>(t[0])],
                                          vertices[static_cast<std::size_t>(t[1])],
                                          vertices[static_cast<std::size_t>(t[2])]);
        if (!(area >= min_area) || area == 0.0) {
            throw Error(ErrorCode::DegenerateFace, "face " + std::to_string(f) + " has area " +
                                                       std::to_string(area));
        }
    }

    const auto edges = edge_faces(faces);
    for (const auto& [key, incident] : edges) {
        if (incident.size() > 2) {
            throw Error(ErrorCode::NonManifold, "edge (" + std::to_string(key.first) + "," +
                                                    std::to_string(key.second) + ") borders " +
                                                    std::to_string(incident.size()) + " faces");
        }
    }
    orient_consistently(faces, edges);

    std::vector<std::vector<int>> nbrs(static_cast<std::size_t>(nv));
    for (const auto& [key, incident] : edges) {
        nbrs[static_cast<std::size_t>(key.first)].push_back(key.second);
        nbrs[static_cast<std::size_t>(key.second)].push_back(key.first);
    }

    // Connectivity over vertices; an unreferenced vertex is its own component.
    std::vector<char> seen(static_cast<std::size_t>(nv), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int reached = 1;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int w : nbrs[static_cast<std::size_t>(v)]) {
            if (!seen[static_cast<std::size_t>(w)]) {
                seen[static_cast<std::size_t>(w)] = 1;
                ++reached;
                stack.push_back(w);
            }
        }
    }
    if (reached != nv) {
        throw Error(ErrorCode::Disconnected, "mesh has more than one connected component (" +
                                                 std::to_string(nv - reached) + " vertices unreachable from vertex 0)");
    }

    TriangleMesh mesh;
    mesh.vertices_ = std::move(vertices);
    mesh.faces_ = std::move(faces);
    mesh.adjacency_offsets_.resize(static_cast<std::size_t>(nv) + 1, 0);
    for (int v = 0; v < nv; ++v) {
        auto& list = nbrs[static_cast<std::size_t>(v)];
        std::sort(list.begin(), list.end());
        mesh.adjacency_offsets_[static_cast<std::size_t>(v) + 1] =
            mesh.adjacency_offsets_[static_cast<std::size_t>(v)] + static_cast<int>(list.size());
        mesh.adjacency_.insert(mesh.adjacency_.end(), list.begin(), list.end());
    }
    return mesh;
}

std::span<const int> TriangleMesh::neighbors(int v) const {
    const auto begin = static_cast<std::size_t>(adjacency_offsets_[static_cast<std::size_t>(v)]);
    const auto end = static_cast<std::size_t>(adjacency_offsets_[static_cast<std::size_t>(v) + 1]);
    return std::span<const int>(adjacency_).subspan(begin, end - begin);
}

double TriangleMesh::face_area(int f) const {
    const Face& t = face(f);
    return triangle_area(vertex(t[0]), vertex(t[1]), vertex(t[2]));
}

double TriangleMesh::bounding_box_diagonal() const { return bbox_diagonal(vertices_); }

std::string TriangleMesh::content_hash() const {
    Sha256 h;
    const std::uint64_t counts[2] = {vertices_.size(), faces_.size()};
    h.update(counts, sizeof(counts));
    for (const Vec3& p : vertices_) h.update(p.data(), 3 * sizeof(double));
    for (const Face& t : faces_) {
        const std::int32_t idx[3] = {t[0], t[1], t[2]};
        h.update(idx, sizeof(idx));
    }
    return h.hex_digest();
}

MeshStats mesh_stats(const TriangleMesh& mesh) {
    MeshStats s;
    s.vertex_count = mesh.vertex_count();
    s.face_count = mesh.face_count();
    for (int v = 0; v < static_cast<int>(mesh.vertex_count()); ++v) s.edge_count += mesh.neighbors(v).size();
    s.edge_count /= 2;
    const auto edges = edge_faces(mesh.faces());
    for (const auto& [key, incident] : edges) {
        if (incident.size() == 1) ++s.boundary_edge_count;
    }
    for (int f = 0; f < static_cast<int>(mesh.face_count()); ++f) s.surface_area += mesh.face_area(f);
    s.bounding_box_diagonal = mesh.bounding_box_diagonal();
    s.euler_characteristic = static_cast<long>(s.vertex_count) - static_cast<long>(s.edge_count) +
                             static_cast<long>(s.face_count);
    return s;
}

std::vector<std::vector<int>> connected_components(const TriangleMesh& mesh, std::span<const int> subset) {
    std::vector<char> member(mesh.vertex_count(), 0);
    for (int v : subset) member[static_cast<std::size_t>(v)] = 1;
    std::vector<int> sorted(subset.begin(), subset.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    std::vector<char> seen(mesh.vertex_count(), 0);
    std::vector<std::vector<int>> components;
    for (int start : sorted) {
        if (seen[static_cast<std::size_t>(start)]) continue;
        std::vector<int> comp{start};
        seen[static_cast<std::size_t>(start)] = 1;
        for (std::size_t i = 0; i < comp.size(); ++i) {
            for (int w : mesh.neighbors(comp[i])) {
                if (member[static_cast<std::size_t>(w)] && !seen[static_cast<std::size_t>(w)]) {
                    seen[static_cast<std::size_t>(w)] = 1;
                    comp.push_back(w);
                }
            }
        }
        std::sort(comp.begin(), comp.end());
        components.push_back(std::move(comp));
    }
    return components;
}

bool within_one_ring(const TriangleMesh& mesh, int a, int b) {
    if (a == b) return true;
    const auto ring = mesh.neighbors(a);
    return std::binary_search(ring.begin(), ring.end(), b);
}

}  // namespace isym
