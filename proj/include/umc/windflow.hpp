#pragma once

#include <vector>

#include "umc/geometry.hpp"

namespace umc {

struct Slice2D {
    double height = 0.0;  // m
    ObstacleMask mask;
    std::vector<double> phi;  // velocity potential, m2/s
    std::vector<double> u;    // x-velocity, m/s, mask layout
    std::vector<double> v;    // y-velocity
    double free_stream = 0.0;
    int iterations = 0;
    double residual = 0.0;

    double speed_at(int i, int j) const;
    // Net face flux out of cell (i,j), m/s (one-sided face velocities).
    double divergence(int i, int j) const;
};

struct WindVolume {
    std::vector<Slice2D> slices;  // strictly increasing heights
    double z0 = 0.5;
    double u10 = 0.0;
    double dir10 = 0.0;  // meteorological, deg from north
};

struct WindConfig {
    double z0 = 0.5;
    double relaxation = 1.8;
    double tolerance = 1e-6;  // relative residual
    int max_iters = 200000;
    std::vector<double> slice_heights{2, 10, 20, 30, 40, 50, 100};
};

// U(z) = u10 * ln(z/z0) / ln(10/z0); 0 below z0. Throws for z0 >= 10 m.
double log_profile(double u10, double z, double z0);

// Meteorological direction (blowing FROM dir10) to flow vector (u east, v north).
void wind_to_vector(double speed, double dir_deg, double& u, double& v);

// Potential-flow Laplace solve (SOR) with uniform-flow Dirichlet boundary and
// zero normal flow at masked cells.
Slice2D solve_slice(const ObstacleMask& mask, double inflow_speed, double inflow_dir,
                    double tolerance, int max_iters, double relaxation = 1.8,
                    double slice_height = 0.0);

WindVolume assemble_pseudo3d(const std::vector<ObstacleMask>& masks_per_height,
                             double u10, double dir10, const WindConfig& config);

struct Vel3 { double u = 0.0, v = 0.0, w = 0.0; };

// Bilinear in-plane, linear in z, clamped to [lowest, highest] slice.
Vel3 sample_wind(const WindVolume& volume, double x, double y, double z);

struct LocalAirState {
    double t_adj = 0.0;            // degC
    double rh_adj = 0.0;           // %
    double wind_speed_local = 0.0; // m/s
};

// Magnus-Tetens saturation vapour pressure, hPa.
double magnus_tetens_svp(double t_c);

// Surrogate boundary-layer adjustment: dT = k_mix*(wind_ref - wind_local)
// clamped to +-dt_max; RH recomputed at constant vapour pressure.
LocalAirState adjust_air_state(double t2m, double rh2m, double wind_local,
                               double wind_ref, double k_mix, double dt_max);

} // namespace umc
