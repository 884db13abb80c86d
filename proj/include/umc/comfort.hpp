#pragma once

#include <string>
#include <vector>

#include "umc/geometry.hpp"

namespace umc {

struct PersonParams {
    double age = 35;
    double height_m = 1.75;
    double weight_kg = 75.0;
    bool male = true;
    double work_w = 80.0;  // activity heat above basal
    double clo = 0.9;
};

// Physiological Equivalent Temperature via a MEMI-style human energy balance:
// solve core/skin/clothing state in the actual environment, then find the
// reference-environment air temperature (MRT = Ta, v = 0.1 m/s, vp = 12 hPa)
// that balances the body with that physiological state frozen.
double pet(double t_air_c, double mrt_c, double wind_ms, double rh_pct,
           const PersonParams& person = {});

struct WallProps {
    double u_value = 2.5;          // W/m2K
    double setpoint_c = 25.0;
    std::vector<double> ctf_weights{1.0};  // sum to 1
};

// q_in(h) = U * sum_k w_k * (T_surf(h-k) - T_set), floored at 0.
// History indices before the start clamp to the earliest sample.
double face_cooling_flux(const std::vector<double>& t_surf_history_c,
                         const WallProps& wall, size_t hour);

struct BuildingEnergy {
    std::string id;
    std::vector<double> hourly_power_w;
    double daily_energy_kwh = 0.0;
    double envelope_area_m2 = 0.0;
    double eui_kwh_m2 = 0.0;  // energy / envelope area
    bool outlier = false;
};

BuildingEnergy building_cooling_load(const std::string& id,
                                     const std::vector<double>& face_areas_m2,
                                     const std::vector<std::vector<double>>& flux_series,
                                     double envelope_area_m2, double dt_hours = 1.0);

// Per-hour comfort fields at pedestrian height, row-major over the grid.
struct ComfortGrid {
    int hour = 0;
    double origin_x = 0.0, origin_y = 0.0, cell_size = 2.0;
    int nx = 0, ny = 0;
    std::vector<uint8_t> valid;
    std::vector<uint8_t> lit;  // direct-sun exposure this hour
    std::vector<double> pet_c, mrt_c, wind_ms, svf, reflected_sw;

    size_t idx(int i, int j) const { return static_cast<size_t>(j) * nx + i; }
};

struct Hotspot {
    double x = 0.0, y = 0.0;
    int hour = 0;
    double pet_c = 0.0, mrt_c = 0.0;
    std::vector<std::string> nearest_buildings;  // <= 2 ids
    std::vector<std::string> causes;             // low wind | high svf | reflected gain
};

struct HotspotThresholds {
    double low_wind_ms = 1.0;
    double high_svf = 0.7;
    double reflected_wm2 = 100.0;
};

// Per-hour maxima ranked by PET descending; ties break to the earlier hour,
// then lexicographic (x, y). The global maximum ranks first.
std::vector<Hotspot> hotspot_scan(const std::vector<ComfortGrid>& hourly,
                                  const BuildingSet& buildings,
                                  const HotspotThresholds& thresholds);

// Sorts by EUI descending and flags EUI > mean + sigma_factor * population std.
std::vector<BuildingEnergy> energy_outliers(std::vector<BuildingEnergy> energies,
                                            double sigma_factor = 1.5);

} // namespace umc
