#pragma once

#include <optional>
#include <string>
#include <vector>

#include "umc/mesh.hpp"

namespace umc {

struct Building {
    std::string id;
    std::string file;
    TriangleMesh mesh;
    Aabb bbox;              // full 3D; bbox_xy is the xy part
    double height_m = 0.0;  // max z - ground (z = 0)
    double footprint_area_m2 = 0.0;
    double volume_m3 = 0.0;
    double envelope_area_m2 = 0.0;
    bool volume_approximate = false;  // mesh had boundary edges
    std::vector<Vec2> outline;        // traced footprint boundary, metres

    // XY point inside the building footprint (projection of the mesh).
    bool footprint_contains(double x, double y) const;
    double footprint_distance(double x, double y) const;  // 0 if inside
};

struct BuildingSet {
    std::vector<Building> buildings;
    TriangleMesh combined;
    TriangleMesh ground;
    Aabb domain_bbox;  // buildings + ground

    const Building* find(const std::string& id) const;
};

struct ObstacleMask {
    double origin_x = 0.0, origin_y = 0.0;
    double cell_size = 1.0;
    int nx = 0, ny = 0;
    std::vector<uint8_t> cells;  // row-major, y outer

    bool at(int i, int j) const { return cells[static_cast<size_t>(j) * nx + i] != 0; }
    void set(int i, int j, bool v) { cells[static_cast<size_t>(j) * nx + i] = v ? 1 : 0; }
    double cx(int i) const { return origin_x + (i + 0.5) * cell_size; }
    double cy(int j) const { return origin_y + (j + 0.5) * cell_size; }
};

struct GeometryConfig {
    double weld_tolerance = 1e-6;       // m
    double cell_size = 2.0;             // m, ground triangulation + footprint raster
    double ground_buffer_factor = 1.2;
    bool permissive = false;            // continue past per-file load errors
    bool auto_shift_to_ground = true;   // re-base meshes whose min z != 0
};

// Loads every .stl in the directory (sorted by filename), cleans, labels,
// computes statistics and attaches the buffered ground plane.
BuildingSet build_index(const std::string& directory, const GeometryConfig& config);

TriangleMesh generate_ground_plane(const Aabb& plan_bbox, double buffer_factor,
                                   double cell_size);

ObstacleMask rasterize_footprints(const BuildingSet& set, double cell_size,
                                  double slice_height);

void render_index_map(const BuildingSet& set, const std::string& path);

void write_building_index_json(const BuildingSet& set, const std::string& path);

} // namespace umc
