#include "umc/mesh.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace umc {

Aabb TriangleMesh::bbox() const {
    Aabb b;
    for (const auto& v : vertices) b.expand(v);
    return b;
}

Vec3 TriangleMesh::triangle_normal(size_t t) const {
    const auto& tri = triangles[t];
    Vec3 e1 = vertices[tri[1]] - vertices[tri[0]];
    Vec3 e2 = vertices[tri[2]] - vertices[tri[0]];
    return e1.cross(e2).normalized();
}

double TriangleMesh::triangle_area(size_t t) const {
    const auto& tri = triangles[t];
    Vec3 e1 = vertices[tri[1]] - vertices[tri[0]];
    Vec3 e2 = vertices[tri[2]] - vertices[tri[0]];
    return 0.5 * e1.cross(e2).norm();
}

Vec3 TriangleMesh::triangle_centroid(size_t t) const {
    const auto& tri = triangles[t];
    return (vertices[tri[0]] + vertices[tri[1]] + vertices[tri[2]]) * (1.0 / 3.0);
}

double TriangleMesh::surface_area() const {
    double a = 0.0;
    for (size_t t = 0; t < triangles.size(); ++t) a += triangle_area(t);
    return a;
}

double TriangleMesh::enclosed_volume() const {
    double v6 = 0.0;
    for (const auto& tri : triangles) {
        const Vec3& a = vertices[tri[0]];
        const Vec3& b = vertices[tri[1]];
        const Vec3& c = vertices[tri[2]];
        v6 += a.dot(b.cross(c));
    }
    return std::abs(v6) / 6.0;
}

bool TriangleMesh::watertight() const {
    std::map<std::pair<uint32_t, uint32_t>, int> edges;
    for (const auto& tri : triangles) {
        for (int i = 0; i < 3; ++i) {
            uint32_t a = tri[i], b = tri[(i + 1) % 3];
            edges[{std::min(a, b), std::max(a, b)}]++;
        }
    }
    for (const auto& [e, n] : edges)
        if (n != 2) return false;
    return !triangles.empty();
}

void TriangleMesh::append(const TriangleMesh& other) {
    uint32_t base = static_cast<uint32_t>(vertices.size());
    vertices.insert(vertices.end(), other.vertices.begin(), other.vertices.end());
    for (const auto& tri : other.triangles)
        triangles.push_back({tri[0] + base, tri[1] + base, tri[2] + base});
}

namespace {

TriangleMesh load_stl_ascii(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open STL file: " + path);
    TriangleMesh mesh;
    std::string tok;
    size_t line = 1;
    std::string content((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    std::istringstream ss(content);
    std::string word;
    std::vector<Vec3> facet;
    while (ss >> word) {
        if (word == "vertex") {
            Vec3 v;
            if (!(ss >> v.x >> v.y >> v.z))
                throw std::runtime_error(path + ": malformed vertex near token " +
                                         std::to_string(ss.tellg()));
            if (!v.finite())
                throw std::runtime_error(path + ": non-finite coordinate near offset " +
                                         std::to_string(ss.tellg()));
            facet.push_back(v);
        } else if (word == "endfacet") {
            if (facet.size() != 3)
                throw std::runtime_error(path + ": facet with " +
                                         std::to_string(facet.size()) + " vertices");
            uint32_t base = static_cast<uint32_t>(mesh.vertices.size());
            mesh.vertices.insert(mesh.vertices.end(), facet.begin(), facet.end());
            mesh.triangles.push_back({base, base + 1, base + 2});
            facet.clear();
        }
    }
    (void)line;
    if (!facet.empty())
        throw std::runtime_error(path + ": truncated facet at end of file");
    return mesh;
}

float read_f32(const char* p) {
    float f;
    std::memcpy(&f, p, 4);
    return f;
}

TriangleMesh load_stl_binary(const std::string& path, const std::string& raw) {
    if (raw.size() < 84)
        throw std::runtime_error(path + ": truncated binary STL (" +
                                 std::to_string(raw.size()) + " bytes < 84)");
    uint32_t count;
    std::memcpy(&count, raw.data() + 80, 4);
    size_t expected = 84 + static_cast<size_t>(count) * 50;
    size_t available = (raw.size() - 84) / 50;
    if (raw.size() < expected)
        throw std::runtime_error(path + ": facet count mismatch: header declares " +
                                 std::to_string(count) + " facets, file holds " +
                                 std::to_string(available));
    TriangleMesh mesh;
    mesh.vertices.reserve(count * 3);
    mesh.triangles.reserve(count);
    for (uint32_t i = 0; i < count; ++i) {
        const char* rec = raw.data() + 84 + static_cast<size_t>(i) * 50;
        uint32_t base = static_cast<uint32_t>(mesh.vertices.size());
        for (int v = 0; v < 3; ++v) {
            Vec3 p{read_f32(rec + 12 + v * 12), read_f32(rec + 16 + v * 12),
                   read_f32(rec + 20 + v * 12)};
            if (!p.finite())
                throw std::runtime_error(path + ": non-finite coordinate at byte offset " +
                                         std::to_string(84 + i * 50 + 12 + v * 12));
            mesh.vertices.push_back(p);
        }
        mesh.triangles.push_back({base, base + 1, base + 2});
    }
    return mesh;
}

} // namespace

TriangleMesh load_stl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open STL file: " + path);
    std::string raw((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
    if (raw.empty()) throw std::runtime_error(path + ": empty file");

    // ASCII files start with "solid" and contain "facet"; some binary
    // exporters also write "solid" into the header, so check both.
    bool starts_solid = raw.rfind("solid", 0) == 0;
    bool has_facet = raw.find("facet") != std::string::npos &&
                     raw.find("vertex") != std::string::npos;
    if (starts_solid && has_facet) return load_stl_ascii(path);
    return load_stl_binary(path, raw);
}

void write_stl_binary(const TriangleMesh& mesh, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write STL file: " + path);
    char header[80] = {};
    std::snprintf(header, sizeof(header), "binary stl");
    out.write(header, 80);
    uint32_t count = static_cast<uint32_t>(mesh.triangles.size());
    out.write(reinterpret_cast<const char*>(&count), 4);
    for (size_t t = 0; t < mesh.triangles.size(); ++t) {
        Vec3 n = mesh.triangle_normal(t);
        float rec[12] = {
            static_cast<float>(n.x), static_cast<float>(n.y), static_cast<float>(n.z)};
        for (int v = 0; v < 3; ++v) {
            const Vec3& p = mesh.vertices[mesh.triangles[t][v]];
            rec[3 + v * 3 + 0] = static_cast<float>(p.x);
            rec[3 + v * 3 + 1] = static_cast<float>(p.y);
            rec[3 + v * 3 + 2] = static_cast<float>(p.z);
        }
        out.write(reinterpret_cast<const char*>(rec), 48);
        uint16_t attr = 0;
        out.write(reinterpret_cast<const char*>(&attr), 2);
    }
}

TriangleMesh clean_mesh(const TriangleMesh& mesh, double weld_tolerance,
                        CleanStats* stats) {
    CleanStats local;
    TriangleMesh out;
    // Quantized-grid weld: vertices in the same tolerance cell merge.
    double inv = 1.0 / std::max(weld_tolerance, 1e-30);
    std::map<std::array<long long, 3>, uint32_t> grid;
    std::vector<uint32_t> remap(mesh.vertices.size());
    for (size_t i = 0; i < mesh.vertices.size(); ++i) {
        const Vec3& v = mesh.vertices[i];
        std::array<long long, 3> key{
            static_cast<long long>(std::llround(v.x * inv)),
            static_cast<long long>(std::llround(v.y * inv)),
            static_cast<long long>(std::llround(v.z * inv))};
        auto it = grid.find(key);
        if (it == grid.end()) {
            uint32_t idx = static_cast<uint32_t>(out.vertices.size());
            grid.emplace(key, idx);
            out.vertices.push_back(v);
            remap[i] = idx;
        } else {
            remap[i] = it->second;
            local.vertices_welded++;
        }
    }
    std::set<std::array<uint32_t, 3>> seen;
    for (const auto& tri : mesh.triangles) {
        std::array<uint32_t, 3> m{remap[tri[0]], remap[tri[1]], remap[tri[2]]};
        if (m[0] == m[1] || m[1] == m[2] || m[0] == m[2]) {
            local.degenerate_removed++;
            continue;
        }
        Vec3 e1 = out.vertices[m[1]] - out.vertices[m[0]];
        Vec3 e2 = out.vertices[m[2]] - out.vertices[m[0]];
        if (e1.cross(e2).norm() < 1e-12) {
            local.degenerate_removed++;
            continue;
        }
        std::array<uint32_t, 3> canon = m;
        // rotate smallest index first so duplicates match regardless of start
        size_t lo = std::min_element(canon.begin(), canon.end()) - canon.begin();
        std::rotate(canon.begin(), canon.begin() + lo, canon.end());
        if (!seen.insert(canon).second) {
            local.duplicates_removed++;
            continue;
        }
        out.triangles.push_back(m);
    }
    if (out.triangles.empty())
        throw std::runtime_error("mesh degenerate after cleaning");
    if (stats) *stats = local;
    return out;
}

} // namespace umc
