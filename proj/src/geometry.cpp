#include "umc/geometry.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace fs = std::filesystem;

namespace umc {

namespace {

bool point_in_tri_2d(double px, double py, const Vec3& a, const Vec3& b, const Vec3& c) {
    auto side = [&](const Vec3& p, const Vec3& q) {
        return (q.x - p.x) * (py - p.y) - (q.y - p.y) * (px - p.x);
    };
    double d1 = side(a, b), d2 = side(b, c), d3 = side(c, a);
    bool has_neg = (d1 < 0) || (d2 < 0) || (d3 < 0);
    bool has_pos = (d1 > 0) || (d2 > 0) || (d3 > 0);
    return !(has_neg && has_pos);
}

double point_seg_dist(double px, double py, const Vec3& a, const Vec3& b) {
    double dx = b.x - a.x, dy = b.y - a.y;
    double len2 = dx * dx + dy * dy;
    double t = len2 > 0 ? ((px - a.x) * dx + (py - a.y) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    double qx = a.x + t * dx, qy = a.y + t * dy;
    return std::hypot(px - qx, py - qy);
}

std::string derive_id(const std::string& stem) {
    std::string id;
    for (char c : stem)
        id += std::isalnum(static_cast<unsigned char>(c))
                  ? static_cast<char>(std::tolower(static_cast<unsigned char>(c)))
                  : '_';
    return id.empty() ? std::string("building") : id;
}

// Boundary of the true-cell region as chained cell-edge loops; the longest
// loop is the outer footprint outline.
std::vector<Vec2> trace_outline(const ObstacleMask& m) {
    using Pt = std::pair<long, long>;  // corner lattice coordinates
    std::map<Pt, std::vector<Pt>> next;  // directed edges, region on the left
    auto filled = [&](int i, int j) {
        return i >= 0 && j >= 0 && i < m.nx && j < m.ny && m.at(i, j);
    };
    for (int j = 0; j < m.ny; ++j)
        for (int i = 0; i < m.nx; ++i) {
            if (!m.at(i, j)) continue;
            if (!filled(i, j - 1)) next[{i, j}].push_back({i + 1, j});          // south
            if (!filled(i + 1, j)) next[{i + 1, j}].push_back({i + 1, j + 1});  // east
            if (!filled(i, j + 1)) next[{i + 1, j + 1}].push_back({i, j + 1});  // north
            if (!filled(i - 1, j)) next[{i, j + 1}].push_back({i, j});          // west
        }
    std::vector<Vec2> best;
    std::set<std::pair<Pt, Pt>> used;
    for (auto& [start, outs] : next) {
        for (const Pt& first : outs) {
            if (used.count({start, first})) continue;
            std::vector<Pt> loop{start};
            Pt cur = first, prev = start;
            used.insert({start, first});
            while (cur != start) {
                loop.push_back(cur);
                auto it = next.find(cur);
                if (it == next.end() || it->second.empty()) break;
                Pt nxt = it->second.front();
                // at corner touches prefer the edge we have not walked
                for (const Pt& cand : it->second)
                    if (!used.count({cur, cand})) { nxt = cand; break; }
                used.insert({cur, nxt});
                prev = cur;
                cur = nxt;
            }
            (void)prev;
            if (loop.size() > best.size()) {
                best.clear();
                for (const Pt& p : loop)
                    best.push_back({m.origin_x + p.first * m.cell_size,
                                    m.origin_y + p.second * m.cell_size});
            }
        }
    }
    return best;
}

Vec2 polygon_centroid(const std::vector<Vec2>& poly) {
    if (poly.size() < 3) {
        Vec2 c{0, 0};
        for (const auto& p : poly) { c.x += p.x; c.y += p.y; }
        if (!poly.empty()) { c.x /= poly.size(); c.y /= poly.size(); }
        return c;
    }
    double a2 = 0.0, cx = 0.0, cy = 0.0;
    for (size_t i = 0; i < poly.size(); ++i) {
        const Vec2& p = poly[i];
        const Vec2& q = poly[(i + 1) % poly.size()];
        double cross = p.x * q.y - q.x * p.y;
        a2 += cross;
        cx += (p.x + q.x) * cross;
        cy += (p.y + q.y) * cross;
    }
    if (std::abs(a2) < 1e-12) return poly[0];
    return {cx / (3.0 * a2), cy / (3.0 * a2)};
}

} // namespace

bool Building::footprint_contains(double x, double y) const {
    const Aabb b = bbox;
    if (x < b.lo.x || x > b.hi.x || y < b.lo.y || y > b.hi.y) return false;
    for (const auto& tri : mesh.triangles)
        if (point_in_tri_2d(x, y, mesh.vertices[tri[0]], mesh.vertices[tri[1]],
                            mesh.vertices[tri[2]]))
            return true;
    return false;
}

double Building::footprint_distance(double x, double y) const {
    if (footprint_contains(x, y)) return 0.0;
    double d = std::numeric_limits<double>::max();
    for (const auto& tri : mesh.triangles)
        for (int e = 0; e < 3; ++e)
            d = std::min(d, point_seg_dist(x, y, mesh.vertices[tri[e]],
                                           mesh.vertices[tri[(e + 1) % 3]]));
    return d;
}

const Building* BuildingSet::find(const std::string& id) const {
    for (const auto& b : buildings)
        if (b.id == id) return &b;
    return nullptr;
}

TriangleMesh generate_ground_plane(const Aabb& plan_bbox, double buffer_factor,
                                   double cell_size) {
    if (buffer_factor < 1.0)
        throw std::runtime_error("ground buffer factor must be >= 1");
    Vec3 c = plan_bbox.centre();
    double wx = (plan_bbox.hi.x - plan_bbox.lo.x) * buffer_factor;
    double wy = (plan_bbox.hi.y - plan_bbox.lo.y) * buffer_factor;
    if (wx <= 0.0 || wy <= 0.0)
        throw std::runtime_error("degenerate plan extents");
    int nx = std::max(1, static_cast<int>(std::ceil(wx / cell_size)));
    int ny = std::max(1, static_cast<int>(std::ceil(wy / cell_size)));
    double x0 = c.x - wx / 2.0, y0 = c.y - wy / 2.0;
    double dx = wx / nx, dy = wy / ny;
    TriangleMesh plane;
    plane.vertices.reserve(static_cast<size_t>(nx + 1) * (ny + 1));
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            plane.vertices.push_back({x0 + i * dx, y0 + j * dy, 0.0});
    auto idx = [&](int i, int j) { return static_cast<uint32_t>(j * (nx + 1) + i); };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            // upward-facing (counter-clockwise seen from +z)
            plane.triangles.push_back({idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)});
            plane.triangles.push_back({idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)});
        }
    return plane;
}

BuildingSet build_index(const std::string& directory, const GeometryConfig& config) {
    std::vector<fs::path> files;
    if (!fs::is_directory(directory))
        throw std::runtime_error("geometry directory not found: " + directory);
    for (const auto& entry : fs::directory_iterator(directory)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
        if (ext == ".stl") files.push_back(entry.path());
    }
    if (files.empty())
        throw std::runtime_error("no STL files in directory: " + directory);
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) {
                  return a.filename().string() < b.filename().string();
              });

    BuildingSet set;
    std::set<std::string> ids;
    Aabb plan;
    for (const auto& path : files) {
        Building b;
        b.file = path.filename().string();
        try {
            b.mesh = clean_mesh(load_stl(path.string()), config.weld_tolerance);
        } catch (const std::exception& e) {
            if (config.permissive) {
                std::cerr << "warning: skipping " << path << ": " << e.what() << "\n";
                continue;
            }
            throw std::runtime_error(std::string("loading ") + path.string() + ": " +
                                     e.what());
        }
        Aabb bb = b.mesh.bbox();
        if (std::abs(bb.lo.z) > 1e-9) {
            std::cerr << "warning: " << b.file << " min z = " << bb.lo.z;
            if (config.auto_shift_to_ground) {
                std::cerr << ", shifting to ground\n";
                for (auto& v : b.mesh.vertices) v.z -= bb.lo.z;
                bb = b.mesh.bbox();
            } else {
                std::cerr << " (not re-based)\n";
            }
        }
        b.bbox = bb;
        b.height_m = bb.hi.z;

        std::string id = derive_id(path.stem().string());
        std::string candidate = id;
        for (int k = 1; ids.count(candidate); ++k)
            candidate = id + "_" + std::to_string(k);
        b.id = candidate;
        ids.insert(candidate);

        // footprint area = projection of upward-facing faces onto XY
        double fp = 0.0;
        for (const auto& tri : b.mesh.triangles) {
            Vec3 e1 = b.mesh.vertices[tri[1]] - b.mesh.vertices[tri[0]];
            Vec3 e2 = b.mesh.vertices[tri[2]] - b.mesh.vertices[tri[0]];
            double az = 0.5 * e1.cross(e2).z;
            if (az > 0.0) fp += az;
        }
        b.footprint_area_m2 = fp;
        b.volume_m3 = b.mesh.enclosed_volume();
        b.volume_approximate = !b.mesh.watertight();
        // envelope excludes the base: downward faces sitting on the ground
        double env = 0.0;
        for (size_t t = 0; t < b.mesh.triangles.size(); ++t) {
            Vec3 n = b.mesh.triangle_normal(t);
            if (n.z < -0.9 && b.mesh.triangle_centroid(t).z < 1e-6) continue;
            env += b.mesh.triangle_area(t);
        }
        b.envelope_area_m2 = env;

        // outline from a per-building footprint raster
        double cs = config.cell_size;
        int onx = std::max(1, static_cast<int>(std::ceil((bb.hi.x - bb.lo.x) / cs)));
        int ony = std::max(1, static_cast<int>(std::ceil((bb.hi.y - bb.lo.y) / cs)));
        ObstacleMask raster;
        raster.origin_x = bb.lo.x;
        raster.origin_y = bb.lo.y;
        raster.cell_size = cs;
        raster.nx = onx;
        raster.ny = ony;
        raster.cells.assign(static_cast<size_t>(onx) * ony, 0);
        for (int j = 0; j < ony; ++j)
            for (int i = 0; i < onx; ++i)
                if (b.footprint_contains(raster.cx(i), raster.cy(j)))
                    raster.set(i, j, true);
        b.outline = trace_outline(raster);

        set.combined.append(b.mesh);
        plan.expand(bb);
        set.buildings.push_back(std::move(b));
    }
    if (set.buildings.empty())
        throw std::runtime_error("no loadable STL files in directory: " + directory);

    set.ground = generate_ground_plane(plan, config.ground_buffer_factor,
                                       config.cell_size);
    set.domain_bbox = plan;
    set.domain_bbox.expand(set.ground.bbox());
    return set;
}

ObstacleMask rasterize_footprints(const BuildingSet& set, double cell_size,
                                  double slice_height) {
    if (cell_size <= 0.0) throw std::runtime_error("cell_size must be > 0");
    ObstacleMask m;
    if (!set.domain_bbox.valid()) return m;
    m.origin_x = set.domain_bbox.lo.x;
    m.origin_y = set.domain_bbox.lo.y;
    m.cell_size = cell_size;
    m.nx = std::max(1, static_cast<int>(
                            std::ceil((set.domain_bbox.hi.x - m.origin_x) / cell_size)));
    m.ny = std::max(1, static_cast<int>(
                            std::ceil((set.domain_bbox.hi.y - m.origin_y) / cell_size)));
    m.cells.assign(static_cast<size_t>(m.nx) * m.ny, 0);
    for (const auto& b : set.buildings) {
        if (b.height_m < slice_height) continue;
        int i0 = std::max(0, static_cast<int>((b.bbox.lo.x - m.origin_x) / cell_size) - 1);
        int i1 = std::min(m.nx - 1,
                          static_cast<int>((b.bbox.hi.x - m.origin_x) / cell_size) + 1);
        int j0 = std::max(0, static_cast<int>((b.bbox.lo.y - m.origin_y) / cell_size) - 1);
        int j1 = std::min(m.ny - 1,
                          static_cast<int>((b.bbox.hi.y - m.origin_y) / cell_size) + 1);
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i)
                if (!m.at(i, j) && b.footprint_contains(m.cx(i), m.cy(j)))
                    m.set(i, j, true);
    }
    return m;
}

void render_index_map(const BuildingSet& set, const std::string& path) {
    if (set.buildings.empty())
        throw std::runtime_error("index map needs a non-empty building set");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write index map: " + path);
    Aabb bb = set.domain_bbox;
    double w = bb.hi.x - bb.lo.x, h = bb.hi.y - bb.lo.y;
    double margin = 0.05 * std::max(w, h);
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\""
        << bb.lo.x - margin << " " << -(bb.hi.y + margin) << " " << w + 2 * margin
        << " " << h + 2 * margin << "\">\n";
    // y axis points north: flip via negated y coordinates
    out << "  <!-- axes in metres -->\n";
    out << "  <line x1=\"" << bb.lo.x << "\" y1=\"" << -bb.lo.y << "\" x2=\""
        << bb.hi.x << "\" y2=\"" << -bb.lo.y
        << "\" stroke=\"#888\" stroke-width=\"0.5\"/>\n";
    out << "  <line x1=\"" << bb.lo.x << "\" y1=\"" << -bb.lo.y << "\" x2=\""
        << bb.lo.x << "\" y2=\"" << -bb.hi.y
        << "\" stroke=\"#888\" stroke-width=\"0.5\"/>\n";
    double font = std::max(1.0, 0.015 * std::max(w, h));
    for (const auto& b : set.buildings) {
        std::vector<Vec2> poly = b.outline;
        if (poly.empty())
            poly = {{b.bbox.lo.x, b.bbox.lo.y}, {b.bbox.hi.x, b.bbox.lo.y},
                    {b.bbox.hi.x, b.bbox.hi.y}, {b.bbox.lo.x, b.bbox.hi.y}};
        out << "  <polygon points=\"";
        for (const auto& p : poly) out << p.x << "," << -p.y << " ";
        out << "\" fill=\"#d9e4ef\" stroke=\"#345\" stroke-width=\"0.4\"/>\n";
        Vec2 c = polygon_centroid(poly);
        out << "  <text x=\"" << c.x << "\" y=\"" << -c.y << "\" font-size=\"" << font
            << "\" text-anchor=\"middle\">" << b.id << "</text>\n";
    }
    out << "</svg>\n";
}

void write_building_index_json(const BuildingSet& set, const std::string& path) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& b : set.buildings) {
        nlohmann::ordered_json j;
        j["id"] = b.id;
        j["file"] = b.file;
        j["bbox_xy"] = {b.bbox.lo.x, b.bbox.lo.y, b.bbox.hi.x, b.bbox.hi.y};
        j["height_m"] = b.height_m;
        j["footprint_area_m2"] = b.footprint_area_m2;
        j["volume_m3"] = b.volume_m3;
        j["envelope_area_m2"] = b.envelope_area_m2;
        j["volume_approximate"] = b.volume_approximate;
        arr.push_back(j);
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write building index: " + path);
    out << arr.dump(2) << "\n";
}

} // namespace umc
