#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "umc/geometry.hpp"

namespace umc {

constexpr double kStefanBoltzmann = 5.670374419e-8;

// Triangle scene with a median-split AABB tree for occlusion queries.
class RayScene {
public:
    void add_mesh(const TriangleMesh& mesh, int face_id_base);
    void build();

    // First triangle hit along origin + t*dir, t in (t_min, inf); -1 if none.
    int first_hit(const Vec3& origin, const Vec3& dir, double t_min = 1e-4) const;
    bool occluded(const Vec3& origin, const Vec3& dir, double t_min = 1e-4) const {
        return first_hit(origin, dir, t_min) >= 0;
    }
    size_t triangle_count() const { return tris_.size(); }

private:
    struct Tri { Vec3 a, b, c; int id; };
    struct Node { Aabb box; int left, right, first, count; };
    std::vector<Tri> tris_;
    std::vector<Node> nodes_;
    int build_node(int first, int count);
};

// Unit vector toward the sun from azimuth (deg from north, cw) and elevation.
Vec3 sun_direction(double azimuth_deg, double elevation_deg);

struct SvfResult {
    double svf = 1.0;
    // blocked-ray histogram: scene face id -> sample count (visible surroundings)
    std::vector<std::pair<int, uint32_t>> hits;
};

// Cosine-weighted hemisphere sampling about `normal`; seeded, deterministic.
SvfResult compute_svf(const RayScene& scene, const Vec3& point, const Vec3& normal,
                      int n_samples, uint32_t seed);

// true = lit (ray toward the sun escapes the scene).
bool shadow_test(const RayScene& scene, const Vec3& point, const Vec3& sun_dir);

// q_sw_in = lit*dni*max(0,cos_inc) + dhi*svf + rho_context*(dni*cosZ + dhi)*(1-svf)
double shortwave_in(bool lit, double cos_incidence, double dni, double dhi,
                    double cos_zenith, double svf, double rho_context);

struct LwExchange { double q_in = 0.0, q_out = 0.0; };
LwExchange longwave_exchange(double emissivity, double t_surf_k, double t_surround_k,
                             double t_air_k, double svf, double sky_emissivity);

double convective_coefficient(double wind_speed, double a = 5.7, double b = 3.8);

// One semi-implicit step of C dT/dt = q_sw + q_lw_in - eps*sigma*T^4 - H(T - T_air).
// Linear terms implicit, LW emission linearized about the current state.
// Throws if the result leaves the [200, 400] K sanity band.
double step_face_temperature(double t_surf_k, double c_areal, double q_sw,
                             double q_lw_in, double emissivity, double h_conv,
                             double t_air_k, double dt_s);

struct MrtPointInputs {
    double dni = 0.0, dhi = 0.0;
    double cos_zenith = 0.0;
    bool lit = false;
    double svf = 1.0;
    double t_air_k = 300.0;
    double t_surround_k = 300.0;
    double sky_emissivity = 0.85;
    double rho_surround = 0.0;  // mean albedo of visible walls
    double rho_ground = 0.0;    // ground albedo below the point
    bool ground_lit = false;
    double alpha_sw = 0.7, alpha_lw = 0.97, f_projected = 0.7;
};

// Six-term isotropic absorbed-radiation budget; returns MRT in degC.
double mrt_at_point(const MrtPointInputs& in);

} // namespace umc
