#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "isym/mesh.hpp"

namespace isym {

enum class MeshFormat { Off, Obj, Ply };

/// Format from the file extension (case-insensitive); nullopt if unknown.
std::optional<MeshFormat> format_from_path(const std::string& path);

/// Reads OFF, OBJ, or PLY (ascii / binary_little_endian). Polygonal faces are
/// fan-triangulated. Any failure to read or parse is a ParseError; the
/// result is validated by TriangleMesh::create.
TriangleMesh load_mesh(const std::string& path, std::optional<MeshFormat> format = std::nullopt);

TriangleMesh parse_off(const std::string& text);
TriangleMesh parse_obj(const std::string& text);
TriangleMesh parse_ply(const std::string& bytes);

void save_mesh(const TriangleMesh& mesh, const std::string& path,
               std::optional<MeshFormat> format = std::nullopt);
std::string to_off(const TriangleMesh& mesh);
std::string to_obj(const TriangleMesh& mesh);

struct ScalarField {
    std::vector<double> values;
};
struct LabelField {
    std::vector<int> labels;  // negative = unlabeled
};
using VertexField = std::variant<ScalarField, LabelField>;

using Rgb = std::array<std::uint8_t, 3>;

/// Scalar fields are min-max normalized (constant field -> 0.5) and mapped
/// through a piecewise-linear 5-stop viridis ramp. Labels use the Tableau-10
/// palette, cycling modulo 10; negative labels are light gray.
std::vector<Rgb> colorize(const VertexField& field);

/// ASCII PLY with double positions and uchar RGB per vertex. Output depends
/// only on the inputs. Throws LengthMismatch.
std::string to_colored_ply(const TriangleMesh& mesh, const VertexField& field);
void export_colored_mesh(const TriangleMesh& mesh, const VertexField& field, const std::string& path);

}  // namespace isym
