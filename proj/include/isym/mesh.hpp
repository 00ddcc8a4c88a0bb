#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace isym {

using Vec3 = Eigen::Vector3d;
using Face = std::array<int, 3>;

/// Connected, edge-manifold, consistently wound triangle mesh.
///
/// Instances can only be obtained through TriangleMesh::create (or the
/// loaders and generators built on it), which runs the full validation, so
/// every live TriangleMesh satisfies the invariants. Immutable afterwards.
class TriangleMesh {
public:
    /// Validates and orients. Throws isym::Error with ParseError (index out
    /// of range), DegenerateFace, NonManifold (including non-orientable
    /// input) or Disconnected.
    static TriangleMesh create(std::vector<Vec3> vertices, std::vector<Face> faces);

    std::size_t vertex_count() const { return vertices_.size(); }
    std::size_t face_count() const { return faces_.size(); }

    std::span<const Vec3> vertices() const { return vertices_; }
    std::span<const Face> faces() const { return faces_; }
    const Vec3& vertex(int v) const { return vertices_[static_cast<std::size_t>(v)]; }
    const Face& face(int f) const { return faces_[static_cast<std::size_t>(f)]; }

    /// Sorted 1-ring neighbours of v.
    std::span<const int> neighbors(int v) const;

    double face_area(int f) const;
    double bounding_box_diagonal() const;

    /// SHA-256 over positions and faces, hex encoded.
    std::string content_hash() const;

private:
    TriangleMesh() = default;

    std::vector<Vec3> vertices_;
    std::vector<Face> faces_;
    std::vector<int> adjacency_offsets_;
    std::vector<int> adjacency_;
};

struct MeshStats {
    std::size_t vertex_count = 0;
    std::size_t face_count = 0;
    std::size_t edge_count = 0;
    std::size_t boundary_edge_count = 0;
    double surface_area = 0.0;
    double bounding_box_diagonal = 0.0;
    long euler_characteristic = 0;
};

MeshStats mesh_stats(const TriangleMesh& mesh);

/// Vertices of `subset` grouped into connected components of the subgraph
/// induced by mesh edges. Components are sorted by their smallest vertex.
std::vector<std::vector<int>> connected_components(const TriangleMesh& mesh,
                                                   std::span<const int> subset);

/// True if b == a or b is in the 1-ring of a.
bool within_one_ring(const TriangleMesh& mesh, int a, int b);

}  // namespace isym
