#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "umc/comfort.hpp"
#include "umc/mesh.hpp"

namespace umc {

struct FieldGrid {
    double origin_x = 0.0, origin_y = 0.0, origin_z = 0.0;
    double spacing = 1.0;
    int nx = 0, ny = 0;  // nz = 1
    // name -> values (nx*ny scalars, or 2*nx*ny packed (u,v) pairs for vectors)
    std::vector<std::pair<std::string, std::vector<double>>> scalars;
    std::vector<std::pair<std::string, std::pair<std::vector<double>,
                                                 std::vector<double>>>> vectors;
};

// Legacy ASCII VTK structured points; fixed %.6e formatting, byte-stable.
void write_vtk_structured(const FieldGrid& grid, const std::string& path);

// Legacy ASCII VTK polydata with CELL_DATA arrays (lengths = triangle count).
void write_vtk_polydata(const TriangleMesh& mesh,
                        const std::vector<std::pair<std::string, std::vector<double>>>& cell_scalars,
                        const std::vector<std::pair<std::string, std::vector<int>>>& cell_ints,
                        const std::string& path);

struct HourSummary {
    int hour = 0;
    double max_pet_c = 0.0;
    double max_mrt_c = 0.0;
    double total_cooling_power_w = 0.0;
    double t_air_c = 0.0;
    double wind_speed_ms = 0.0;
    double ghi_wm2 = 0.0;
};

struct RunMetrics {
    std::vector<BuildingEnergy> building_energies;
    std::vector<Hotspot> hotspots;
    double peak_pet_c = 0.0;
    double peak_mrt_c = 0.0;
    std::vector<HourSummary> hours;
    std::map<std::string, std::string> files;  // logical name -> relative path

    nlohmann::ordered_json to_json() const;
    static RunMetrics from_json(const nlohmann::json& j);
};

void write_metrics(const RunMetrics& metrics, const std::string& path);
RunMetrics load_metrics(const std::string& path);

} // namespace umc
