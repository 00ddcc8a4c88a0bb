#include "isym/mesh_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "isym/error.hpp"

namespace isym {
namespace {

[[noreturn]] void parse_fail(const std::string& what) { throw Error(ErrorCode::ParseError, what); }

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) parse_fail("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

double to_double(const std::string& tok) {
    double v = 0.0;
    const char* end = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(tok.data(), end, v);
    if (ec != std::errc() || ptr != end) parse_fail("bad number '" + tok + "'");
    return v;
}

long to_long(const std::string& tok) {
    long v = 0;
    const char* end = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(tok.data(), end, v);
    if (ec != std::errc() || ptr != end) parse_fail("bad integer '" + tok + "'");
    return v;
}

void fan_triangulate(const std::vector<int>& poly, std::vector<Face>& faces) {
    if (poly.size() < 3) parse_fail("face with fewer than 3 vertices");
    for (std::size_t i = 1; i + 1 < poly.size(); ++i) faces.push_back({poly[0], poly[i], poly[i + 1]});
}

// Strips comments and blank lines.
std::vector<std::string> content_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        lines.push_back(line);
    }
    return lines;
}

// ---- PLY ----

enum class PlyType { I8, U8, I16, U16, I32, U32, F32, F64 };

PlyType ply_type(const std::string& name) {
    if (name == "char" || name == "int8") return PlyType::I8;
    if (name == "uchar" || name == "uint8") return PlyType::U8;
    if (name == "short" || name == "int16") return PlyType::I16;
    if (name == "ushort" || name == "uint16") return PlyType::U16;
    if (name == "int" || name == "int32") return PlyType::I32;
    if (name == "uint" || name == "uint32") return PlyType::U32;
    if (name == "float" || name == "float32") return PlyType::F32;
    if (name == "double" || name == "float64") return PlyType::F64;
    parse_fail("unknown PLY type '" + name + "'");
}

std::size_t ply_size(PlyType t) {
    switch (t) {
        case PlyType::I8:
        case PlyType::U8: return 1;
        case PlyType::I16:
        case PlyType::U16: return 2;
        case PlyType::I32:
        case PlyType::U32:
        case PlyType::F32: return 4;
        case PlyType::F64: return 8;
    }
    return 0;
}

struct PlyProperty {
    std::string name;
    PlyType type = PlyType::F32;
    bool is_list = false;
    PlyType count_type = PlyType::U8;
};

struct PlyElement {
    std::string name;
    std::size_t count = 0;
    std::vector<PlyProperty> properties;
};

class BinaryCursor {
public:
    BinaryCursor(const std::string& data, std::size_t pos) : data_(data), pos_(pos) {}

    double read(PlyType t) {
        const std::size_t n = ply_size(t);
        if (pos_ + n > data_.size()) parse_fail("truncated binary PLY");
        const char* p = data_.data() + pos_;
        pos_ += n;
        switch (t) {
            case PlyType::I8: return get<std::int8_t>(p);
            case PlyType::U8: return get<std::uint8_t>(p);
            case PlyType::I16: return get<std::int16_t>(p);
            case PlyType::U16: return get<std::uint16_t>(p);
            case PlyType::I32: return get<std::int32_t>(p);
            case PlyType::U32: return get<std::uint32_t>(p);
            case PlyType::F32: return get<float>(p);
            case PlyType::F64: return get<double>(p);
        }
        return 0.0;
    }

private:
    template <class T>
    static double get(const char* p) {
        T v;
        std::memcpy(&v, p, sizeof(T));  // host is little-endian on supported targets
        return static_cast<double>(v);
    }

    const std::string& data_;
    std::size_t pos_;
};

class AsciiCursor {
public:
    explicit AsciiCursor(std::istringstream& in) : in_(in) {}
    double read(PlyType) {
        std::string tok;
        if (!(in_ >> tok)) parse_fail("truncated ASCII PLY");
        return to_double(tok);
    }

private:
    std::istringstream& in_;
};

template <class Cursor>
void read_ply_body(Cursor& cur, const std::vector<PlyElement>& elements, std::vector<Vec3>& vertices,
                   std::vector<Face>& faces) {
    for (const PlyElement& el : elements) {
        const bool is_vertex = el.name == "vertex";
        const bool is_face = el.name == "face";
        int xi = -1, yi = -1, zi = -1, fi = -1;
        for (int p = 0; p < static_cast<int>(el.properties.size()); ++p) {
            const auto& name = el.properties[static_cast<std::size_t>(p)].name;
            if (name == "x") xi = p;
            if (name == "y") yi = p;
            if (name == "z") zi = p;
            if (name == "vertex_indices" || name == "vertex_index") fi = p;
        }
        if (is_vertex && (xi < 0 || yi < 0 || zi < 0)) parse_fail("PLY vertex element lacks x/y/z");
        if (is_face && fi < 0) parse_fail("PLY face element lacks vertex_indices");
        std::vector<int> poly;
        for (std::size_t i = 0; i < el.count; ++i) {
            Vec3 pos = Vec3::Zero();
            for (int p = 0; p < static_cast<int>(el.properties.size()); ++p) {
                const PlyProperty& prop = el.properties[static_cast<std::size_t>(p)];
                if (prop.is_list) {
                    const double n = cur.read(prop.count_type);
                    if (n < 0 || n > 1e6 || n != std::floor(n)) parse_fail("bad PLY list length");
                    poly.clear();
                    for (int k = 0; k < static_cast<int>(n); ++k) {
                        const double idx = cur.read(prop.type);
                        if (idx != std::floor(idx) || std::abs(idx) > 2e9) parse_fail("bad PLY vertex index");
                        poly.push_back(static_cast<int>(idx));
                    }
                    if (is_face && p == fi) fan_triangulate(poly, faces);
                } else {
                    const double v = cur.read(prop.type);
                    if (is_vertex) {
                        if (p == xi) pos.x() = v;
                        if (p == yi) pos.y() = v;
                        if (p == zi) pos.z() = v;
                    }
                }
            }
            if (is_vertex) vertices.push_back(pos);
        }
    }
}

void append_format(std::string& out, const char* fmt, auto... args) {
    char buf[256];
    const int n = std::snprintf(buf, sizeof(buf), fmt, args...);
    out.append(buf, static_cast<std::size_t>(n));
}

}  // namespace

std::optional<MeshFormat> format_from_path(const std::string& path) {
    const auto dot = path.rfind('.');
    if (dot == std::string::npos) return std::nullopt;
    const std::string ext = lower(path.substr(dot + 1));
    if (ext == "off") return MeshFormat::Off;
    if (ext == "obj") return MeshFormat::Obj;
    if (ext == "ply") return MeshFormat::Ply;
    return std::nullopt;
}

TriangleMesh parse_off(const std::string& text) {
    const auto lines = content_lines(text);
    if (lines.empty()) parse_fail("empty OFF file");
    auto header = split_ws(lines[0]);
    std::size_t line_idx = 1;
    if (header.empty() || header[0].size() < 3 || header[0].substr(header[0].size() - 3) != "OFF") {
        parse_fail("missing OFF header");
    }
    std::vector<std::string> counts(header.begin() + 1, header.end());
    if (counts.empty()) {
        if (lines.size() < 2) parse_fail("missing OFF counts");
        counts = split_ws(lines[line_idx++]);
    }
    if (counts.size() < 2) parse_fail("bad OFF counts line");
    const long nv = to_long(counts[0]);
    const long nf = to_long(counts[1]);
    if (nv < 0 || nf < 0) parse_fail("negative OFF counts");
    if (lines.size() < line_idx + static_cast<std::size_t>(nv) + static_cast<std::size_t>(nf)) {
        parse_fail("OFF file truncated");
    }
    std::vector<Vec3> vertices;
    vertices.reserve(static_cast<std::size_t>(nv));
    for (long i = 0; i < nv; ++i) {
        const auto tok = split_ws(lines[line_idx++]);
        if (tok.size() < 3) parse_fail("OFF vertex line with fewer than 3 coordinates");
        vertices.emplace_back(to_double(tok[0]), to_double(tok[1]), to_double(tok[2]));
    }
    std::vector<Face> faces;
    std::vector<int> poly;
    for (long i = 0; i < nf; ++i) {
        const auto tok = split_ws(lines[line_idx++]);
        if (tok.empty()) parse_fail("empty OFF face line");
        const long n = to_long(tok[0]);
        if (n < 0 || tok.size() < static_cast<std::size_t>(n) + 1) parse_fail("short OFF face line");
        poly.clear();
        for (long k = 0; k < n; ++k) poly.push_back(static_cast<int>(to_long(tok[static_cast<std::size_t>(k) + 1])));
        fan_triangulate(poly, faces);
    }
    return TriangleMesh::create(std::move(vertices), std::move(faces));
}

TriangleMesh parse_obj(const std::string& text) {
    std::vector<Vec3> vertices;
    std::vector<Face> faces;
    std::vector<int> poly;
    for (const auto& line : content_lines(text)) {
        const auto tok = split_ws(line);
        if (tok.empty()) continue;
        if (tok[0] == "v") {
            if (tok.size() < 4) parse_fail("OBJ vertex with fewer than 3 coordinates");
            vertices.emplace_back(to_double(tok[1]), to_double(tok[2]), to_double(tok[3]));
        } else if (tok[0] == "f") {
            poly.clear();
            for (std::size_t k = 1; k < tok.size(); ++k) {
                const std::string idx_str = tok[k].substr(0, tok[k].find('/'));
                long idx = to_long(idx_str);
                if (idx < 0) idx += static_cast<long>(vertices.size()) + 1;
                if (idx == 0) parse_fail("OBJ index 0");
                poly.push_back(static_cast<int>(idx - 1));
            }
            fan_triangulate(poly, faces);
        }
    }
    return TriangleMesh::create(std::move(vertices), std::move(faces));
}

TriangleMesh parse_ply(const std::string& bytes) {
    const std::string end_marker = "end_header";
    const auto end_pos = bytes.find(end_marker);
    if (bytes.rfind("ply", 0) != 0 || end_pos == std::string::npos) parse_fail("missing PLY header");
    std::size_t body = end_pos + end_marker.size();
    if (body < bytes.size() && bytes[body] == '\r') ++body;
    if (body < bytes.size() && bytes[body] == '\n') ++body;

    std::istringstream header(bytes.substr(0, end_pos));
    std::string line;
    std::string format;
    std::vector<PlyElement> elements;
    while (std::getline(header, line)) {
        auto tok = split_ws(line);
        if (tok.empty()) continue;
        if (tok[0] == "format") {
            if (tok.size() < 2) parse_fail("bad PLY format line");
            format = tok[1];
        } else if (tok[0] == "element") {
            if (tok.size() < 3) parse_fail("bad PLY element line");
            const long count = to_long(tok[2]);
            if (count < 0) parse_fail("negative PLY element count");
            elements.push_back({tok[1], static_cast<std::size_t>(count), {}});
        } else if (tok[0] == "property") {
            if (elements.empty()) parse_fail("PLY property before element");
            PlyProperty prop;
            if (tok.size() >= 5 && tok[1] == "list") {
                prop.is_list = true;
                prop.count_type = ply_type(tok[2]);
                prop.type = ply_type(tok[3]);
                prop.name = tok[4];
            } else if (tok.size() >= 3) {
                prop.type = ply_type(tok[1]);
                prop.name = tok[2];
            } else {
                parse_fail("bad PLY property line");
            }
            elements.back().properties.push_back(prop);
        }
    }

    std::vector<Vec3> vertices;
    std::vector<Face> faces;
    if (format == "ascii") {
        std::istringstream in(bytes.substr(body));
        AsciiCursor cur(in);
        read_ply_body(cur, elements, vertices, faces);
    } else if (format == "binary_little_endian") {
        BinaryCursor cur(bytes, body);
        read_ply_body(cur, elements, vertices, faces);
    } else {
        parse_fail("unsupported PLY format '" + format + "'");
    }
    return TriangleMesh::create(std::move(vertices), std::move(faces));
}

TriangleMesh load_mesh(const std::string& path, std::optional<MeshFormat> format) {
    if (!format) format = format_from_path(path);
    if (!format) parse_fail("cannot infer mesh format from '" + path + "'");
    const std::string data = read_file(path);
    switch (*format) {
        case MeshFormat::Off: return parse_off(data);
        case MeshFormat::Obj: return parse_obj(data);
        case MeshFormat::Ply: return parse_ply(data);
    }
    parse_fail("unknown format");
}

std::string to_off(const TriangleMesh& mesh) {
    std::string out = "OFF\n";
    append_format(out, "%zu %zu 0\n", mesh.vertex_count(), mesh.face_count());
    for (const Vec3& p : mesh.vertices()) append_format(out, "%.17g %.17g %.17g\n", p.x(), p.y(), p.z());
    for (const Face& f : mesh.faces()) append_format(out, "3 %d %d %d\n", f[0], f[1], f[2]);
    return out;
}

std::string to_obj(const TriangleMesh& mesh) {
    std::string out;
    for (const Vec3& p : mesh.vertices()) append_format(out, "v %.17g %.17g %.17g\n", p.x(), p.y(), p.z());
    for (const Face& f : mesh.faces()) append_format(out, "f %d %d %d\n", f[0] + 1, f[1] + 1, f[2] + 1);
    return out;
}

void save_mesh(const TriangleMesh& mesh, const std::string& path, std::optional<MeshFormat> format) {
    if (!format) format = format_from_path(path);
    if (!format) throw Error(ErrorCode::InvalidArgument, "cannot infer mesh format from '" + path + "'");
    std::string data;
    switch (*format) {
        case MeshFormat::Off: data = to_off(mesh); break;
        case MeshFormat::Obj: data = to_obj(mesh); break;
        case MeshFormat::Ply: data = to_colored_ply(mesh, ScalarField{std::vector<double>(mesh.vertex_count(), 0.0)}); break;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out << data;
}

std::vector<Rgb> colorize(const VertexField& field) {
    static constexpr std::array<std::array<double, 3>, 5> kViridis = {{
        {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37},
    }};
    static constexpr std::array<Rgb, 10> kTableau = {{
        {31, 119, 180}, {255, 127, 14}, {44, 160, 44}, {214, 39, 40}, {148, 103, 189},
        {140, 86, 75}, {227, 119, 194}, {127, 127, 127}, {188, 189, 34}, {23, 190, 207},
    }};
    std::vector<Rgb> colors;
    if (const auto* scalar = std::get_if<ScalarField>(&field)) {
        const auto& v = scalar->values;
        double lo = v.empty() ? 0.0 : *std::min_element(v.begin(), v.end());
        double hi = v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
        colors.reserve(v.size());
        for (double x : v) {
            double t = hi > lo ? (x - lo) / (hi - lo) : 0.5;
            t = std::clamp(t, 0.0, 1.0) * 4.0;
            const int seg = std::min(3, static_cast<int>(t));
            const double w = t - seg;
            Rgb c{};
            for (int k = 0; k < 3; ++k) {
                const double val = (1.0 - w) * kViridis[static_cast<std::size_t>(seg)][static_cast<std::size_t>(k)] +
                                   w * kViridis[static_cast<std::size_t>(seg) + 1][static_cast<std::size_t>(k)];
                c[static_cast<std::size_t>(k)] = static_cast<std::uint8_t>(std::lround(val));
            }
            colors.push_back(c);
        }
    } else {
        const auto& labels = std::get<LabelField>(field).labels;
        colors.reserve(labels.size());
        for (int l : labels) colors.push_back(l < 0 ? Rgb{191, 191, 191} : kTableau[static_cast<std::size_t>(l % 10)]);
    }
    return colors;
}

std::string to_colored_ply(const TriangleMesh& mesh, const VertexField& field) {
    const std::size_t n = std::visit(
        [](const auto& f) {
            if constexpr (std::is_same_v<std::decay_t<decltype(f)>, ScalarField>) return f.values.size();
            else return f.labels.size();
        },
        field);
    if (n != mesh.vertex_count()) {
        throw Error(ErrorCode::LengthMismatch, "field has " + std::to_string(n) + " entries for " +
                                                   std::to_string(mesh.vertex_count()) + " vertices");
    }
    const auto colors = colorize(field);
    std::string out = "ply\nformat ascii 1.0\ncomment isym colored export\n";
    append_format(out, "element vertex %zu\n", mesh.vertex_count());
    out += "property double x\nproperty double y\nproperty double z\n";
    out += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    append_format(out, "element face %zu\n", mesh.face_count());
    out += "property list uchar int vertex_indices\nend_header\n";
    for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
        const Vec3& p = mesh.vertices()[i];
        append_format(out, "%.17g %.17g %.17g %u %u %u\n", p.x(), p.y(), p.z(), unsigned{colors[i][0]},
                      unsigned{colors[i][1]}, unsigned{colors[i][2]});
    }
    for (const Face& f : mesh.faces()) append_format(out, "3 %d %d %d\n", f[0], f[1], f[2]);
    return out;
}

void export_colored_mesh(const TriangleMesh& mesh, const VertexField& field, const std::string& path) {
    const std::string data = to_colored_ply(mesh, field);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out << data;
}

}  // namespace isym
