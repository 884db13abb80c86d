#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "umc/comfort.hpp"
#include "umc/geometry.hpp"
#include "umc/params.hpp"
#include "umc/radiation.hpp"
#include "umc/weather.hpp"
#include "umc/windflow.hpp"

namespace umc {

enum class FaceClass { Roof, Wall, Ground };

struct SurfaceFace {
    int building = -1;  // index into BuildingSet::buildings, -1 for ground
    FaceClass cls = FaceClass::Ground;
    Vec3 centroid;
    Vec3 normal;
    double area = 0.0;
    bool active = true;  // base faces are carried in the scene but not simulated
    double albedo = 0.15;
    double emissivity = 0.9;
    double svf = 1.0;
    double rho_context = 0.0;  // albedo of visible surroundings, hit-weighted
    std::vector<std::pair<int, uint32_t>> hits;
};

// Per-building material overrides applied on top of the per-class defaults.
struct MaterialOverrides {
    std::map<std::string, double> roof_albedo;  // building id -> albedo
    std::map<std::string, double> wall_albedo;
};

// One hour of weather forcing, sentinel-free.
struct HourForcing {
    Timestamp time;
    double t_air_c = 30.0;
    double rh_pct = 70.0;
    double wind_speed_10m = 2.0;
    double wind_dir_deg = 90.0;
    double dni = 0.0, dhi = 0.0;
    SolarPosition sun;
};

// Fills gaps from params defaults, decomposes GHI where DNI/DHI are missing.
std::vector<HourForcing> prepare_forcing(const std::vector<WeatherRecord>& day,
                                         const SiteLocation& site,
                                         const ResolvedParams& params);

// Transient surface energy balance for every exterior face over a diurnal
// cycle: per-face SVF once, then hourly shortwave/longwave/convective forcing
// integrated with sub-hour steps. Surround temperature and reflected gain use
// the visibility histogram as a single mean-field bounce.
class SurfaceSimulator {
public:
    SurfaceSimulator(const BuildingSet& set, const ResolvedParams& params,
                     const MaterialOverrides& overrides = {});

    void run_day(const std::vector<HourForcing>& day, const WindVolume& wind);

    const TriangleMesh& scene_mesh() const { return scene_mesh_; }
    const RayScene& scene() const { return scene_; }
    const std::vector<SurfaceFace>& faces() const { return faces_; }

    // [hour][face]
    std::vector<std::vector<double>> t_surf_c, q_sw, q_lw_in, q_conv;
    std::vector<std::vector<uint8_t>> lit;

    // Hour-resolved mean temperature of what a given visibility histogram
    // sees, degC; falls back to air temperature when nothing is visible.
    double surround_temp_c(const std::vector<std::pair<int, uint32_t>>& hits,
                           size_t hour, double t_air_c) const;
    double surround_albedo(const std::vector<std::pair<int, uint32_t>>& hits) const;

    std::vector<BuildingEnergy> building_energies(const BuildingSet& set,
                                                  const ResolvedParams& params) const;

private:
    TriangleMesh scene_mesh_;
    RayScene scene_;
    std::vector<SurfaceFace> faces_;
    const ResolvedParams& params_;
};

// Pedestrian-height comfort grid: SVF/visibility once per point, then per
// hour local wind, adjusted air state, MRT and PET.
class PedestrianComfort {
public:
    PedestrianComfort(const BuildingSet& set, const SurfaceSimulator& surfaces,
                      const ResolvedParams& params);

    // Produces one ComfortGrid per entry of `day`; `surfaces` must have run.
    std::vector<ComfortGrid> run_day(const std::vector<HourForcing>& day,
                                     const WindVolume& wind,
                                     const SurfaceSimulator& surfaces) const;

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    const std::vector<double>& svf() const { return svf_; }
    double origin_x() const { return ox_; }
    double origin_y() const { return oy_; }
    double cell() const { return cell_; }

private:
    const BuildingSet& set_;
    const ResolvedParams& params_;
    double ox_ = 0.0, oy_ = 0.0, cell_ = 2.0;
    int nx_ = 0, ny_ = 0;
    std::vector<uint8_t> valid_;
    std::vector<double> svf_;
    std::vector<std::vector<std::pair<int, uint32_t>>> hits_;
};

// Masks per slice height for the potential-flow solver.
std::vector<ObstacleMask> build_masks(const BuildingSet& set,
                                      const ResolvedParams& params);

// Solves the slice stack for the representative hour's direction and rescales
// the potential linearly for other wind speeds (the Laplace problem is linear
// in the free-stream magnitude).
WindVolume solve_wind(const std::vector<ObstacleMask>& masks, double u10,
                      double dir10, const ResolvedParams& params);
WindVolume rescale_wind(const WindVolume& base, double u10);

} // namespace umc
