#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "umc/vec.hpp"

namespace umc {

struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<uint32_t, 3>> triangles;

    Aabb bbox() const;
    Vec3 triangle_normal(size_t t) const;   // unit normal (right-hand rule)
    double triangle_area(size_t t) const;
    Vec3 triangle_centroid(size_t t) const;
    double surface_area() const;
    // Signed tetrahedron sum; exact for watertight meshes.
    double enclosed_volume() const;
    // True if every edge is shared by exactly two triangles.
    bool watertight() const;
    void append(const TriangleMesh& other);
};

struct CleanStats {
    size_t vertices_welded = 0;
    size_t degenerate_removed = 0;
    size_t duplicates_removed = 0;
};

// Binary or ASCII STL, auto-detected. Throws std::runtime_error with the
// offending byte/line offset on malformed input.
TriangleMesh load_stl(const std::string& path);

void write_stl_binary(const TriangleMesh& mesh, const std::string& path);

// Welds vertices within weld_tolerance, drops zero-area and duplicate
// triangles. Throws if nothing survives.
TriangleMesh clean_mesh(const TriangleMesh& mesh, double weld_tolerance,
                        CleanStats* stats = nullptr);

} // namespace umc
