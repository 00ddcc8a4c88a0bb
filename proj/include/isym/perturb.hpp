#pragma once

#include <cstdint>
#include <string>

#include "isym/mesh.hpp"

namespace isym {

enum class PerturbKind { Noise, Scale, MicroHoles, IsometryBend };

/// parameter meaning per kind:
///   Noise        Gaussian displacement sigma, fraction of the bbox diagonal
///   Scale        uniform factor (> 0)
///   MicroHoles   number of faces removed, none sharing a vertex
///   IsometryBend bend angle in degrees
struct Perturbation {
    PerturbKind kind = PerturbKind::Noise;
    double parameter = 0.0;
};

std::string to_string(PerturbKind kind);
PerturbKind parse_perturb_kind(const std::string& name);  // throws InvalidArgument

/// Vertex ids are preserved by every kind. The bend rotates vertices with
/// z above the bbox centre about the x axis by the given angle, blended
/// smoothly over a band of 10% of the z extent around the plane.
/// MicroHoles throws Disconnected if the result falls apart.
TriangleMesh perturb(const TriangleMesh& mesh, const Perturbation& p, std::uint64_t seed);

}  // namespace isym
