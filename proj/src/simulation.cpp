#include "umc/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <stdexcept>

namespace umc {

namespace {

constexpr double kPi = 3.14159265358979323846;

double param_or(const ResolvedParams& params, const std::string& field, double fallback) {
    return params.has(field) ? params.get_double(field) : fallback;
}

int thread_chunks() {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 4 : static_cast<int>(n);
}

} // namespace

std::vector<HourForcing> prepare_forcing(const std::vector<WeatherRecord>& day,
                                         const SiteLocation& site,
                                         const ResolvedParams& params) {
    std::vector<HourForcing> out;
    out.reserve(day.size());
    for (const auto& rec : day) {
        HourForcing f;
        f.time = rec.time;
        f.t_air_c = rec.t_air_2m.value_or(params.get_double("t_air_c"));
        f.rh_pct = rec.rh_2m.value_or(params.get_double("rh_pct"));
        f.wind_speed_10m = rec.wind_speed_10m.value_or(params.get_double("wind_speed_10m_ms"));
        f.wind_dir_deg = rec.wind_dir_10m.value_or(params.get_double("wind_dir_deg"));
        f.sun = solar_position(site, rec.time.month, rec.time.day, rec.time.hour + 0.5);
        if (rec.dni && rec.dhi) {
            f.dni = *rec.dni;
            f.dhi = *rec.dhi;
        } else if (rec.ghi) {
            double e0 = extraterrestrial_irradiance(day_of_year(rec.time.month, rec.time.day));
            SwSplit split = decompose_ghi(*rec.ghi, f.sun.zenith, e0);
            f.dni = split.dni;
            f.dhi = split.dhi;
        }
        if (f.sun.elevation <= 0.0) { f.dni = 0.0; }
        out.push_back(f);
    }
    return out;
}

SurfaceSimulator::SurfaceSimulator(const BuildingSet& set, const ResolvedParams& params,
                                   const MaterialOverrides& overrides)
    : params_(params) {
    const double a_roof = params.get_double("albedo_roof");
    const double a_wall = params.get_double("albedo_wall");
    const double a_ground = params.get_double("albedo_ground");
    const double e_roof = params.get_double("emissivity_roof");
    const double e_wall = params.get_double("emissivity_wall");
    const double e_ground = params.get_double("emissivity_ground");

    for (size_t b = 0; b < set.buildings.size(); ++b) {
        const auto& bld = set.buildings[b];
        size_t base = scene_mesh_.triangles.size();
        scene_mesh_.append(bld.mesh);
        for (size_t t = base; t < scene_mesh_.triangles.size(); ++t) {
            SurfaceFace f;
            f.building = static_cast<int>(b);
            f.normal = scene_mesh_.triangle_normal(t);
            f.centroid = scene_mesh_.triangle_centroid(t);
            f.area = scene_mesh_.triangle_area(t);
            if (f.normal.z >= 0.7) {
                f.cls = FaceClass::Roof;
            } else if (f.normal.z <= -0.7) {
                f.cls = FaceClass::Roof;  // soffit; base faces deactivated below
                if (f.centroid.z < 1e-3) f.active = false;
            } else {
                f.cls = FaceClass::Wall;
            }
            if (f.cls == FaceClass::Roof) {
                auto it = overrides.roof_albedo.find(bld.id);
                f.albedo = it != overrides.roof_albedo.end() ? it->second : a_roof;
                f.emissivity = e_roof;
            } else {
                auto it = overrides.wall_albedo.find(bld.id);
                f.albedo = it != overrides.wall_albedo.end() ? it->second : a_wall;
                f.emissivity = e_wall;
            }
            faces_.push_back(std::move(f));
        }
    }
    size_t ground_base = scene_mesh_.triangles.size();
    scene_mesh_.append(set.ground);
    for (size_t t = ground_base; t < scene_mesh_.triangles.size(); ++t) {
        SurfaceFace f;
        f.building = -1;
        f.cls = FaceClass::Ground;
        f.normal = scene_mesh_.triangle_normal(t);
        f.centroid = scene_mesh_.triangle_centroid(t);
        f.area = scene_mesh_.triangle_area(t);
        f.albedo = a_ground;
        f.emissivity = e_ground;
        // ground cells under a footprint are occluded interiors; skip them
        for (const auto& bld : set.buildings) {
            if (bld.footprint_contains(f.centroid.x, f.centroid.y)) {
                f.active = false;
                break;
            }
        }
        faces_.push_back(std::move(f));
    }

    scene_.add_mesh(scene_mesh_, 0);
    scene_.build();

    const int samples = params.get_int("svf_samples");
    const uint32_t seed = static_cast<uint32_t>(params.get_int("seed"));
    const size_t n = faces_.size();
    std::vector<std::future<void>> jobs;
    const int chunks = thread_chunks();
    const size_t step = (n + chunks - 1) / std::max(chunks, 1);
    for (size_t lo = 0; lo < n; lo += step) {
        size_t hi = std::min(lo + step, n);
        jobs.push_back(std::async(std::launch::async, [this, lo, hi, samples, seed]() {
            for (size_t i = lo; i < hi; ++i) {
                auto& f = faces_[i];
                if (!f.active) { f.svf = 0.0; continue; }
                Vec3 p = f.centroid + f.normal * 1e-2;
                auto res = compute_svf(scene_, p, f.normal, samples,
                                       seed + static_cast<uint32_t>(i) * 2654435761u);
                f.svf = res.svf;
                f.hits = std::move(res.hits);
            }
        }));
    }
    for (auto& j : jobs) j.get();
    for (auto& f : faces_) f.rho_context = surround_albedo(f.hits);
}

double SurfaceSimulator::surround_albedo(
        const std::vector<std::pair<int, uint32_t>>& hits) const {
    double wsum = 0.0, asum = 0.0;
    for (const auto& [id, count] : hits) {
        if (id < 0 || static_cast<size_t>(id) >= faces_.size()) continue;
        wsum += count;
        asum += count * faces_[id].albedo;
    }
    return wsum > 0.0 ? asum / wsum : 0.0;
}

double SurfaceSimulator::surround_temp_c(
        const std::vector<std::pair<int, uint32_t>>& hits, size_t hour,
        double t_air_c) const {
    if (hour >= t_surf_c.size()) return t_air_c;
    const auto& temps = t_surf_c[hour];
    double wsum = 0.0, tsum = 0.0;
    for (const auto& [id, count] : hits) {
        if (id < 0 || static_cast<size_t>(id) >= temps.size()) continue;
        wsum += count;
        tsum += count * temps[id];
    }
    return wsum > 0.0 ? tsum / wsum : t_air_c;
}

void SurfaceSimulator::run_day(const std::vector<HourForcing>& day,
                               const WindVolume& wind) {
    if (day.empty()) throw std::runtime_error("surface simulation needs >= 1 hour of forcing");
    const double cap = params_.get_double("heat_capacity_j_m3k") *
                       params_.get_double("effective_thickness_m");
    const double dt = params_.get_double("dt_s");
    const double h_a = params_.get_double("h_conv_a");
    const double h_b = params_.get_double("h_conv_b");
    const double eps_sky = params_.get_double("sky_emissivity");
    const size_t n = faces_.size();

    t_surf_c.assign(day.size(), std::vector<double>(n, 0.0));
    q_sw.assign(day.size(), std::vector<double>(n, 0.0));
    q_lw_in.assign(day.size(), std::vector<double>(n, 0.0));
    q_conv.assign(day.size(), std::vector<double>(n, 0.0));
    lit.assign(day.size(), std::vector<uint8_t>(n, 0));

    std::vector<double> t_k(n, day.front().t_air_c + 273.15);

    for (size_t h = 0; h < day.size(); ++h) {
        const auto& f = day[h];
        const bool sun_up = f.sun.elevation > 0.0;
        const Vec3 sun = sun_direction(f.sun.azimuth, f.sun.elevation);
        const double cos_z = std::cos(f.sun.zenith * kPi / 180.0);
        const double t_air_k = f.t_air_c + 273.15;
        const double ref10 = f.wind_speed_10m;
        WindVolume hour_wind = rescale_wind(wind, ref10);

        const int chunks = thread_chunks();
        const size_t step = (n + chunks - 1) / std::max(chunks, 1);
        std::vector<std::future<void>> jobs;
        for (size_t lo = 0; lo < n; lo += step) {
            size_t hi = std::min(lo + step, n);
            jobs.push_back(std::async(std::launch::async, [&, lo, hi, h]() {
                for (size_t i = lo; i < hi; ++i) {
                    auto& face = faces_[i];
                    if (!face.active) {
                        t_k[i] = t_air_k;
                        t_surf_c[h][i] = f.t_air_c;
                        continue;
                    }
                    Vec3 p = face.centroid + face.normal * 1e-2;
                    bool is_lit = sun_up && face.normal.dot(sun) > 0.0 &&
                                  shadow_test(scene_, p, sun);
                    lit[h][i] = is_lit ? 1 : 0;
                    double cos_inc = std::max(0.0, face.normal.dot(sun));
                    double sw = shortwave_in(is_lit, cos_inc, f.dni, f.dhi,
                                             std::max(cos_z, 0.0), face.svf,
                                             face.rho_context);
                    double q_abs = (1.0 - face.albedo) * sw;

                    double t_surround = (h == 0 ? f.t_air_c
                                                : surround_temp_c(face.hits, h - 1, f.t_air_c)) +
                                        273.15;
                    LwExchange lw = longwave_exchange(face.emissivity, t_k[i],
                                                      t_surround, t_air_k,
                                                      face.svf, eps_sky);

                    Vel3 vel = hour_wind.slices.empty()
                                   ? Vel3{}
                                   : sample_wind(hour_wind, face.centroid.x,
                                                 face.centroid.y,
                                                 std::max(face.centroid.z, 0.5));
                    double speed = std::sqrt(vel.u * vel.u + vel.v * vel.v);
                    double hc = convective_coefficient(speed, h_a, h_b);

                    double t = t_k[i];
                    int substeps = std::max(1, static_cast<int>(std::lround(3600.0 / dt)));
                    for (int s = 0; s < substeps; ++s)
                        t = step_face_temperature(t, cap, q_abs, lw.q_in,
                                                  face.emissivity, hc, t_air_k, dt);
                    t_k[i] = t;
                    t_surf_c[h][i] = t - 273.15;
                    q_sw[h][i] = q_abs;
                    q_lw_in[h][i] = lw.q_in;
                    q_conv[h][i] = hc * (t - t_air_k);
                }
            }));
        }
        for (auto& j : jobs) j.get();
    }
}

std::vector<BuildingEnergy> SurfaceSimulator::building_energies(
        const BuildingSet& set, const ResolvedParams& params) const {
    WallProps wall;
    wall.u_value = params.get_double("wall_u_wm2k");
    wall.setpoint_c = params.get_double("indoor_setpoint_c");
    wall.ctf_weights = params.get_doubles("ctf_weights");

    std::vector<BuildingEnergy> out;
    for (size_t b = 0; b < set.buildings.size(); ++b) {
        std::vector<double> areas;
        std::vector<std::vector<double>> series;
        for (size_t i = 0; i < faces_.size(); ++i) {
            const auto& f = faces_[i];
            if (f.building != static_cast<int>(b) || !f.active) continue;
            areas.push_back(f.area);
            std::vector<double> hist(t_surf_c.size());
            for (size_t h = 0; h < t_surf_c.size(); ++h) hist[h] = t_surf_c[h][i];
            std::vector<double> flux(t_surf_c.size());
            for (size_t h = 0; h < t_surf_c.size(); ++h)
                flux[h] = face_cooling_flux(hist, wall, h);
            series.push_back(std::move(flux));
        }
        out.push_back(building_cooling_load(set.buildings[b].id, areas, series,
                                            set.buildings[b].envelope_area_m2));
    }
    return out;
}

std::vector<ObstacleMask> build_masks(const BuildingSet& set,
                                      const ResolvedParams& params) {
    auto heights = params.get_doubles("slice_heights_m");
    double cell = params.get_double("cell_size_m");
    std::vector<ObstacleMask> masks;
    masks.reserve(heights.size());
    for (double h : heights) masks.push_back(rasterize_footprints(set, cell, h));
    return masks;
}

WindVolume solve_wind(const std::vector<ObstacleMask>& masks, double u10,
                      double dir10, const ResolvedParams& params) {
    WindConfig cfg;
    cfg.z0 = params.get_double("z0_m");
    cfg.relaxation = params.get_double("sor_relaxation");
    cfg.tolerance = params.get_double("sor_tolerance");
    cfg.max_iters = params.get_int("sor_max_iters");
    cfg.slice_heights = params.get_doubles("slice_heights_m");
    if (cfg.slice_heights.size() != masks.size())
        throw std::runtime_error("mask count does not match slice heights");
    return assemble_pseudo3d(masks, u10, dir10, cfg);
}

WindVolume rescale_wind(const WindVolume& base, double u10) {
    if (base.u10 <= 0.0) return base;
    double k = u10 / base.u10;
    WindVolume out = base;
    out.u10 = u10;
    for (auto& s : out.slices) {
        s.free_stream *= k;
        for (auto& x : s.phi) x *= k;
        for (auto& x : s.u) x *= k;
        for (auto& x : s.v) x *= k;
    }
    return out;
}

PedestrianComfort::PedestrianComfort(const BuildingSet& set,
                                     const SurfaceSimulator& surfaces,
                                     const ResolvedParams& params)
    : set_(set), params_(params) {
    cell_ = params.get_double("pedestrian_cell_size_m");
    const Aabb box = set.ground.bbox();
    ox_ = box.lo.x;
    oy_ = box.lo.y;
    nx_ = std::max(1, static_cast<int>(std::floor((box.hi.x - box.lo.x) / cell_)));
    ny_ = std::max(1, static_cast<int>(std::floor((box.hi.y - box.lo.y) / cell_)));
    const size_t n = static_cast<size_t>(nx_) * ny_;
    valid_.assign(n, 1);
    svf_.assign(n, 1.0);
    hits_.assign(n, {});

    const int samples = params.get_int("svf_samples");
    const uint32_t seed = static_cast<uint32_t>(params.get_int("seed")) ^ 0x9e3779b9u;
    const auto& scene = surfaces.scene();

    const int chunks = thread_chunks();
    const int rows_per = (ny_ + chunks - 1) / std::max(chunks, 1);
    std::vector<std::future<void>> jobs;
    for (int j0 = 0; j0 < ny_; j0 += rows_per) {
        int j1 = std::min(j0 + rows_per, ny_);
        jobs.push_back(std::async(std::launch::async, [&, j0, j1]() {
            for (int j = j0; j < j1; ++j) {
                for (int i = 0; i < nx_; ++i) {
                    size_t k = static_cast<size_t>(j) * nx_ + i;
                    double x = ox_ + (i + 0.5) * cell_;
                    double y = oy_ + (j + 0.5) * cell_;
                    for (const auto& b : set_.buildings) {
                        if (b.footprint_contains(x, y)) { valid_[k] = 0; break; }
                    }
                    if (!valid_[k]) continue;
                    auto res = compute_svf(scene, Vec3{x, y, 1.5}, Vec3{0, 0, 1},
                                           samples,
                                           seed + static_cast<uint32_t>(k) * 2654435761u);
                    svf_[k] = res.svf;
                    hits_[k] = std::move(res.hits);
                }
            }
        }));
    }
    for (auto& j : jobs) j.get();
}

std::vector<ComfortGrid> PedestrianComfort::run_day(
        const std::vector<HourForcing>& day, const WindVolume& wind,
        const SurfaceSimulator& surfaces) const {
    PersonParams person;
    person.age = param_or(params_, "person_age", 35);
    person.height_m = params_.get_double("person_height_m");
    person.weight_kg = params_.get_double("person_weight_kg");
    person.male = params_.get_string("person_sex") != "female";
    person.work_w = params_.get_double("person_work_w");
    person.clo = params_.get_double("person_clo");

    const double k_mix = params_.get_double("k_mix_k_per_ms");
    const double dt_max = params_.get_double("delta_t_max_k");
    const double z0 = params_.get_double("z0_m");
    const double eps_sky = params_.get_double("sky_emissivity");
    const double rho_ground = params_.get_double("albedo_ground");
    const double alpha_sw = params_.get_double("alpha_sw");
    const double alpha_lw = params_.get_double("alpha_lw");
    const double f_proj = params_.get_double("f_projected");
    const auto& scene = surfaces.scene();
    const size_t n = static_cast<size_t>(nx_) * ny_;

    std::vector<ComfortGrid> out;
    out.reserve(day.size());
    for (size_t h = 0; h < day.size(); ++h) {
        const auto& f = day[h];
        ComfortGrid g;
        g.hour = f.time.hour;
        g.origin_x = ox_;
        g.origin_y = oy_;
        g.cell_size = cell_;
        g.nx = nx_;
        g.ny = ny_;
        g.valid = valid_;
        g.lit.assign(n, 0);
        g.pet_c.assign(n, 0.0);
        g.mrt_c.assign(n, 0.0);
        g.wind_ms.assign(n, 0.0);
        g.svf = svf_;
        g.reflected_sw.assign(n, 0.0);

        const bool sun_up = f.sun.elevation > 0.0;
        const Vec3 sun = sun_direction(f.sun.azimuth, f.sun.elevation);
        const double cos_z = std::max(0.0, std::cos(f.sun.zenith * kPi / 180.0));
        WindVolume hour_wind = rescale_wind(wind, f.wind_speed_10m);
        const double wind_ref = log_profile(f.wind_speed_10m, 2.0, z0);

        const int chunks = thread_chunks();
        const int rows_per = (ny_ + chunks - 1) / std::max(chunks, 1);
        std::vector<std::future<void>> jobs;
        for (int j0 = 0; j0 < ny_; j0 += rows_per) {
            int j1 = std::min(j0 + rows_per, ny_);
            jobs.push_back(std::async(std::launch::async, [&, j0, j1, h]() {
                for (int j = j0; j < j1; ++j) {
                    for (int i = 0; i < nx_; ++i) {
                        size_t k = static_cast<size_t>(j) * nx_ + i;
                        if (!valid_[k]) continue;
                        double x = ox_ + (i + 0.5) * cell_;
                        double y = oy_ + (j + 0.5) * cell_;
                        Vec3 p{x, y, 1.5};
                        bool is_lit = sun_up && shadow_test(scene, p, sun);
                        bool ground_lit = sun_up &&
                                          shadow_test(scene, Vec3{x, y, 0.05}, sun);
                        g.lit[k] = is_lit ? 1 : 0;

                        double wind_local = 0.0;
                        if (!hour_wind.slices.empty()) {
                            Vel3 v = sample_wind(hour_wind, x, y, 2.0);
                            wind_local = std::sqrt(v.u * v.u + v.v * v.v);
                        }
                        LocalAirState air = adjust_air_state(f.t_air_c, f.rh_pct,
                                                             wind_local, wind_ref,
                                                             k_mix, dt_max);
                        g.wind_ms[k] = wind_local;

                        MrtPointInputs m;
                        m.dni = f.dni;
                        m.dhi = f.dhi;
                        m.cos_zenith = cos_z;
                        m.lit = is_lit;
                        m.svf = svf_[k];
                        m.t_air_k = air.t_adj + 273.15;
                        m.t_surround_k = surfaces.surround_temp_c(hits_[k], h,
                                                                  air.t_adj) + 273.15;
                        m.sky_emissivity = eps_sky;
                        m.rho_surround = surfaces.surround_albedo(hits_[k]);
                        m.rho_ground = rho_ground;
                        m.ground_lit = ground_lit;
                        m.alpha_sw = alpha_sw;
                        m.alpha_lw = alpha_lw;
                        m.f_projected = f_proj;
                        double mrt = mrt_at_point(m);
                        g.mrt_c[k] = mrt;
                        g.reflected_sw[k] =
                            m.rho_surround * (f.dni * cos_z + f.dhi) * (1.0 - svf_[k]) +
                            0.5 * rho_ground *
                                ((ground_lit ? 1.0 : 0.0) * f.dni * cos_z +
                                 f.dhi * svf_[k]);
                        double v_eff = std::max(0.1, wind_local);
                        g.pet_c[k] = pet(air.t_adj, mrt, v_eff, air.rh_adj, person);
                    }
                }
            }));
        }
        for (auto& j : jobs) j.get();
        out.push_back(std::move(g));
    }
    return out;
}

} // namespace umc
