#pragma once

#include <optional>
#include <string>
#include <vector>

#include "isym/mesh.hpp"

namespace isym {

/// Unit-radius geodesic sphere; subdivision s has 20*4^s faces.
TriangleMesh icosphere(int subdivisions);

/// Closed capped cylinder of radius 1 spanning z in [-1, 1]: `rings` vertex
/// rings of `segments` vertices plus one centre vertex per cap.
TriangleMesh cylinder(int segments, int rings);

/// Unit square [0,1]^2 in the z = 0 plane, (nx+1)*(ny+1) vertices.
TriangleMesh grid_square(int nx, int ny);

/// Radial protrusion on the unit sphere: pushes the surface outward by
/// `length * exp(-theta^2 / (2 width^2))`, theta the angle to `direction`.
struct Part {
    Vec3 direction;
    double length = 0.5;
    double width = 0.3;  // radians
};

/// Radially deformed icosphere that is reflection symmetric across the
/// coordinate plane of every listed axis (0 = x, 1 = y, 2 = z). Parts are
/// evaluated on the folded direction, so each part appears once per
/// mirror image.
struct CompositeSpec {
    int subdivisions = 4;
    std::vector<Part> parts;
    std::vector<int> mirror_axes{0};
};

/// Throws InvalidSpec for nonpositive sizes or missing planes.
TriangleMesh mirrored_composite(const CompositeSpec& spec);

/// Vertex permutation induced by reflecting positions across the plane
/// axis = 0; nullopt unless every reflected vertex coincides exactly with a
/// vertex.
std::optional<std::vector<int>> reflection_permutation(const TriangleMesh& mesh, int axis);

/// Composition p2 after p1: v -> p2[p1[v]].
std::vector<int> compose(const std::vector<int>& p1, const std::vector<int>& p2);

/// A generated shape together with its exact symmetries.
struct Fixture {
    std::string name;
    TriangleMesh mesh;
    struct Symmetry {
        std::string name;
        std::vector<int> permutation;
    };
    std::vector<Symmetry> symmetries;
    /// Axis of the primary mirror plane, used to define sides.
    int side_axis = 0;
};

/// Lumpy blob with a single mirror plane x = 0 and no other symmetry.
Fixture bilateral_fixture(int subdivisions = 4);
/// Body with four legs, head and tail; mirror plane x = 0.
Fixture quadruped_fixture(int subdivisions = 4);
/// Three arms in the xy-plane (one long, two equal); symmetric under the
/// y-mirror, the z-mirror ("front-back") and their composition, the
/// half-turn about the x axis.
Fixture star_fixture(int subdivisions = 4);

/// Bumpy capped cylinder, 68 x 50 rings (3402 vertices), mirror plane x = 0.
Fixture torso_fixture();

/// Also "torso", "sphere" (icosphere of the given level) and "cylinder" (68 x 50,
/// 3402 vertices, level ignored), with whichever coordinate mirrors are exact.
std::optional<Fixture> fixture_by_name(const std::string& name, int subdivisions = 4);

}  // namespace isym
