#include "umc/outputs.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace umc {

namespace {

std::string fnum(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6e", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    return out;
}

} // namespace

void write_vtk_structured(const FieldGrid& grid, const std::string& path) {
    const size_t n = static_cast<size_t>(grid.nx) * grid.ny;
    auto out = open_out(path);
    out << "# vtk DataFile Version 3.0\n";
    out << "microclimate field slice\n";
    out << "ASCII\n";
    out << "DATASET STRUCTURED_POINTS\n";
    out << "DIMENSIONS " << grid.nx << " " << grid.ny << " 1\n";
    out << "ORIGIN " << fnum(grid.origin_x) << " " << fnum(grid.origin_y)
        << " " << fnum(grid.origin_z) << "\n";
    out << "SPACING " << fnum(grid.spacing) << " " << fnum(grid.spacing)
        << " " << fnum(grid.spacing) << "\n";
    out << "POINT_DATA " << n << "\n";
    for (const auto& [name, values] : grid.scalars) {
        if (values.size() != n)
            throw std::runtime_error("scalar field size mismatch: " + name);
        out << "SCALARS " << name << " double 1\n";
        out << "LOOKUP_TABLE default\n";
        for (double v : values) out << fnum(v) << "\n";
    }
    for (const auto& [name, uv] : grid.vectors) {
        const auto& [u, v] = uv;
        if (u.size() != n || v.size() != n)
            throw std::runtime_error("vector field size mismatch: " + name);
        out << "VECTORS " << name << " double\n";
        for (size_t k = 0; k < n; ++k)
            out << fnum(u[k]) << " " << fnum(v[k]) << " " << fnum(0.0) << "\n";
    }
}

void write_vtk_polydata(const TriangleMesh& mesh,
                        const std::vector<std::pair<std::string, std::vector<double>>>& cell_scalars,
                        const std::vector<std::pair<std::string, std::vector<int>>>& cell_ints,
                        const std::string& path) {
    const size_t nt = mesh.triangles.size();
    auto out = open_out(path);
    out << "# vtk DataFile Version 3.0\n";
    out << "surface mesh with cell data\n";
    out << "ASCII\n";
    out << "DATASET POLYDATA\n";
    out << "POINTS " << mesh.vertices.size() << " double\n";
    for (const auto& p : mesh.vertices)
        out << fnum(p.x) << " " << fnum(p.y) << " " << fnum(p.z) << "\n";
    out << "POLYGONS " << nt << " " << nt * 4 << "\n";
    for (const auto& t : mesh.triangles)
        out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
    if (cell_scalars.empty() && cell_ints.empty()) return;
    out << "CELL_DATA " << nt << "\n";
    for (const auto& [name, values] : cell_scalars) {
        if (values.size() != nt)
            throw std::runtime_error("cell data size mismatch: " + name);
        out << "SCALARS " << name << " double 1\n";
        out << "LOOKUP_TABLE default\n";
        for (double v : values) out << fnum(v) << "\n";
    }
    for (const auto& [name, values] : cell_ints) {
        if (values.size() != nt)
            throw std::runtime_error("cell data size mismatch: " + name);
        out << "SCALARS " << name << " int 1\n";
        out << "LOOKUP_TABLE default\n";
        for (int v : values) out << v << "\n";
    }
}

nlohmann::ordered_json RunMetrics::to_json() const {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["peak_pet_c"] = peak_pet_c;
    j["peak_mrt_c"] = peak_mrt_c;
    auto& jb = j["buildings"] = nlohmann::ordered_json::array();
    for (const auto& b : building_energies) {
        nlohmann::ordered_json e;
        e["id"] = b.id;
        e["daily_cooling_kwh"] = b.daily_energy_kwh;
        e["envelope_area_m2"] = b.envelope_area_m2;
        e["eui_kwh_m2"] = b.eui_kwh_m2;
        e["outlier"] = b.outlier;
        e["hourly_power_w"] = b.hourly_power_w;
        jb.push_back(std::move(e));
    }
    auto& jh = j["hotspots"] = nlohmann::ordered_json::array();
    for (const auto& h : hotspots) {
        nlohmann::ordered_json e;
        e["x_m"] = h.x;
        e["y_m"] = h.y;
        e["hour"] = h.hour;
        e["pet_c"] = h.pet_c;
        e["mrt_c"] = h.mrt_c;
        e["nearest_buildings"] = h.nearest_buildings;
        e["causes"] = h.causes;
        jh.push_back(std::move(e));
    }
    auto& js = j["hours"] = nlohmann::ordered_json::array();
    for (const auto& h : hours) {
        nlohmann::ordered_json e;
        e["hour"] = h.hour;
        e["max_pet_c"] = h.max_pet_c;
        e["max_mrt_c"] = h.max_mrt_c;
        e["total_cooling_power_w"] = h.total_cooling_power_w;
        e["t_air_c"] = h.t_air_c;
        e["wind_speed_ms"] = h.wind_speed_ms;
        e["ghi_wm2"] = h.ghi_wm2;
        js.push_back(std::move(e));
    }
    j["files"] = files;
    return j;
}

RunMetrics RunMetrics::from_json(const nlohmann::json& j) {
    RunMetrics m;
    m.peak_pet_c = j.at("peak_pet_c").get<double>();
    m.peak_mrt_c = j.at("peak_mrt_c").get<double>();
    for (const auto& e : j.at("buildings")) {
        BuildingEnergy b;
        b.id = e.at("id").get<std::string>();
        b.daily_energy_kwh = e.at("daily_cooling_kwh").get<double>();
        b.envelope_area_m2 = e.at("envelope_area_m2").get<double>();
        b.eui_kwh_m2 = e.at("eui_kwh_m2").get<double>();
        b.outlier = e.at("outlier").get<bool>();
        b.hourly_power_w = e.at("hourly_power_w").get<std::vector<double>>();
        m.building_energies.push_back(std::move(b));
    }
    for (const auto& e : j.at("hotspots")) {
        Hotspot h;
        h.x = e.at("x_m").get<double>();
        h.y = e.at("y_m").get<double>();
        h.hour = e.at("hour").get<int>();
        h.pet_c = e.at("pet_c").get<double>();
        h.mrt_c = e.at("mrt_c").get<double>();
        h.nearest_buildings = e.at("nearest_buildings").get<std::vector<std::string>>();
        h.causes = e.at("causes").get<std::vector<std::string>>();
        m.hotspots.push_back(std::move(h));
    }
    for (const auto& e : j.at("hours")) {
        HourSummary h;
        h.hour = e.at("hour").get<int>();
        h.max_pet_c = e.at("max_pet_c").get<double>();
        h.max_mrt_c = e.at("max_mrt_c").get<double>();
        h.total_cooling_power_w = e.at("total_cooling_power_w").get<double>();
        h.t_air_c = e.at("t_air_c").get<double>();
        h.wind_speed_ms = e.at("wind_speed_ms").get<double>();
        h.ghi_wm2 = e.at("ghi_wm2").get<double>();
        m.hours.push_back(h);
    }
    if (j.contains("files"))
        m.files = j.at("files").get<std::map<std::string, std::string>>();
    return m;
}

void write_metrics(const RunMetrics& metrics, const std::string& path) {
    auto out = open_out(path);
    out << metrics.to_json().dump(2) << "\n";
}

RunMetrics load_metrics(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open metrics file: " + path);
    nlohmann::json j;
    in >> j;
    return RunMetrics::from_json(j);
}

} // namespace umc
