#include "umc/windflow.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <stdexcept>

namespace umc {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double log_profile(double u10, double z, double z0) {
    if (z0 <= 0.0) throw std::runtime_error("z0 must be > 0");
    if (z0 >= 10.0) throw std::runtime_error("z0 must be < 10 m reference height");
    if (z <= z0) return 0.0;
    return u10 * std::log(z / z0) / std::log(10.0 / z0);
}

void wind_to_vector(double speed, double dir_deg, double& u, double& v) {
    // meteorological convention: dir is where the wind comes FROM
    double rad = dir_deg * kPi / 180.0;
    u = -speed * std::sin(rad);
    v = -speed * std::cos(rad);
}

double Slice2D::speed_at(int i, int j) const {
    size_t k = static_cast<size_t>(j) * mask.nx + i;
    return std::hypot(u[k], v[k]);
}

double Slice2D::divergence(int i, int j) const {
    // net face outflow per cell, one-sided face velocities; masked faces carry
    // zero flux, so this equals the Laplace residual / h
    const ObstacleMask& m = mask;
    if (i <= 0 || j <= 0 || i >= m.nx - 1 || j >= m.ny - 1 || m.at(i, j)) return 0.0;
    auto phi_at = [&](int ii, int jj) {
        return phi[static_cast<size_t>(jj) * m.nx + ii];
    };
    double h = m.cell_size;
    double c = phi_at(i, j);
    double flux = 0.0;
    if (!m.at(i + 1, j)) flux += (phi_at(i + 1, j) - c) / h;
    if (!m.at(i - 1, j)) flux += (phi_at(i - 1, j) - c) / h;
    if (!m.at(i, j + 1)) flux += (phi_at(i, j + 1) - c) / h;
    if (!m.at(i, j - 1)) flux += (phi_at(i, j - 1) - c) / h;
    return flux;
}

Slice2D solve_slice(const ObstacleMask& mask, double inflow_speed, double inflow_dir,
                    double tolerance, int max_iters, double relaxation,
                    double slice_height) {
    if (mask.nx < 3 || mask.ny < 3)
        throw std::runtime_error("slice grid too small for a potential-flow solve");
    size_t n = static_cast<size_t>(mask.nx) * mask.ny;
    size_t masked = 0;
    for (auto c : mask.cells) masked += c ? 1 : 0;
    if (masked == n) throw std::runtime_error("slice domain fully masked");

    double uin, vin;
    wind_to_vector(inflow_speed, inflow_dir, uin, vin);

    Slice2D s;
    s.height = slice_height;
    s.mask = mask;
    s.free_stream = inflow_speed;
    s.phi.assign(n, 0.0);
    double h = mask.cell_size;

    auto at = [&](int i, int j) -> double& {
        return s.phi[static_cast<size_t>(j) * mask.nx + i];
    };
    // initial guess = uniform-flow potential; also the Dirichlet boundary data
    for (int j = 0; j < mask.ny; ++j)
        for (int i = 0; i < mask.nx; ++i)
            at(i, j) = uin * mask.cx(i) + vin * mask.cy(j);

    double phi_tol = tolerance * std::max(inflow_speed, 0.0) * h;
    double max_delta = 0.0;
    int iter = 0;
    for (; iter < max_iters; ++iter) {
        max_delta = 0.0;
        for (int j = 1; j < mask.ny - 1; ++j) {
            for (int i = 1; i < mask.nx - 1; ++i) {
                if (mask.at(i, j)) continue;
                double sum = 0.0;
                int k = 0;
                if (!mask.at(i + 1, j)) { sum += at(i + 1, j); ++k; }
                if (!mask.at(i - 1, j)) { sum += at(i - 1, j); ++k; }
                if (!mask.at(i, j + 1)) { sum += at(i, j + 1); ++k; }
                if (!mask.at(i, j - 1)) { sum += at(i, j - 1); ++k; }
                if (k == 0) continue;
                double delta = relaxation * (sum / k - at(i, j));
                at(i, j) += delta;
                max_delta = std::max(max_delta, std::abs(delta));
            }
        }
        if (max_delta <= phi_tol) { ++iter; break; }
    }
    s.iterations = iter;
    s.residual = max_delta / std::max(h, 1e-30);
    if (max_delta > phi_tol)
        throw std::runtime_error("potential-flow solve did not converge after " +
                                 std::to_string(max_iters) + " sweeps, residual " +
                                 std::to_string(s.residual));

    // velocities: central differences, one-sided next to masked cells and edges
    s.u.assign(n, 0.0);
    s.v.assign(n, 0.0);
    for (int j = 0; j < mask.ny; ++j) {
        for (int i = 0; i < mask.nx; ++i) {
            if (mask.at(i, j)) continue;
            size_t k = static_cast<size_t>(j) * mask.nx + i;
            bool e = i + 1 < mask.nx && !mask.at(i + 1, j);
            bool w = i - 1 >= 0 && !mask.at(i - 1, j);
            if (e && w) s.u[k] = (at(i + 1, j) - at(i - 1, j)) / (2 * h);
            else if (e) s.u[k] = (at(i + 1, j) - at(i, j)) / h;
            else if (w) s.u[k] = (at(i, j) - at(i - 1, j)) / h;
            bool nn = j + 1 < mask.ny && !mask.at(i, j + 1);
            bool ss = j - 1 >= 0 && !mask.at(i, j - 1);
            if (nn && ss) s.v[k] = (at(i, j + 1) - at(i, j - 1)) / (2 * h);
            else if (nn) s.v[k] = (at(i, j + 1) - at(i, j)) / h;
            else if (ss) s.v[k] = (at(i, j) - at(i, j - 1)) / h;
        }
    }
    return s;
}

WindVolume assemble_pseudo3d(const std::vector<ObstacleMask>& masks_per_height,
                             double u10, double dir10, const WindConfig& config) {
    if (masks_per_height.size() != config.slice_heights.size())
        throw std::runtime_error("one obstacle mask per slice height required");
    WindVolume vol;
    vol.z0 = config.z0;
    vol.u10 = u10;
    vol.dir10 = dir10;

    std::vector<std::future<Slice2D>> jobs;
    for (size_t k = 0; k < masks_per_height.size(); ++k) {
        double z = config.slice_heights[k];
        jobs.push_back(std::async(std::launch::async, [&, k, z]() {
            double speed = log_profile(u10, z, config.z0);
            return solve_slice(masks_per_height[k], speed, dir10, config.tolerance,
                               config.max_iters, config.relaxation, z);
        }));
    }
    for (auto& j : jobs) vol.slices.push_back(j.get());
    return vol;
}

namespace {

double bilinear(const std::vector<double>& f, const ObstacleMask& m, double x, double y) {
    // sample on cell centres, clamped at the domain edge
    double gx = (x - m.origin_x) / m.cell_size - 0.5;
    double gy = (y - m.origin_y) / m.cell_size - 0.5;
    int i0 = static_cast<int>(std::floor(gx));
    int j0 = static_cast<int>(std::floor(gy));
    double fx = gx - i0, fy = gy - j0;
    auto clampi = [&](int i) { return std::clamp(i, 0, m.nx - 1); };
    auto clampj = [&](int j) { return std::clamp(j, 0, m.ny - 1); };
    auto v = [&](int i, int j) {
        return f[static_cast<size_t>(clampj(j)) * m.nx + clampi(i)];
    };
    return (1 - fx) * (1 - fy) * v(i0, j0) + fx * (1 - fy) * v(i0 + 1, j0) +
           (1 - fx) * fy * v(i0, j0 + 1) + fx * fy * v(i0 + 1, j0 + 1);
}

} // namespace

Vel3 sample_wind(const WindVolume& vol, double x, double y, double z) {
    if (vol.slices.empty()) throw std::runtime_error("empty wind volume");
    const ObstacleMask& m0 = vol.slices.front().mask;
    if (x < m0.origin_x || y < m0.origin_y ||
        x > m0.origin_x + m0.nx * m0.cell_size ||
        y > m0.origin_y + m0.ny * m0.cell_size)
        throw std::runtime_error("sample point outside slice domain");

    auto sample_slice = [&](const Slice2D& s) {
        Vel3 r;
        r.u = bilinear(s.u, s.mask, x, y);
        r.v = bilinear(s.v, s.mask, x, y);
        return r;
    };
    if (z <= vol.slices.front().height) return sample_slice(vol.slices.front());
    if (z >= vol.slices.back().height) return sample_slice(vol.slices.back());
    size_t hi = 1;
    while (vol.slices[hi].height < z) ++hi;
    const Slice2D& a = vol.slices[hi - 1];
    const Slice2D& b = vol.slices[hi];
    double t = (z - a.height) / (b.height - a.height);
    Vel3 va = sample_slice(a), vb = sample_slice(b);
    return {va.u * (1 - t) + vb.u * t, va.v * (1 - t) + vb.v * t, 0.0};
}

double magnus_tetens_svp(double t_c) {
    return 6.1078 * std::exp(17.27 * t_c / (t_c + 237.3));
}

LocalAirState adjust_air_state(double t2m, double rh2m, double wind_local,
                               double wind_ref, double k_mix, double dt_max) {
    LocalAirState st;
    st.wind_speed_local = wind_local;
    double dt = std::clamp(k_mix * (wind_ref - wind_local), -dt_max, dt_max);
    st.t_adj = t2m + dt;
    double vp = rh2m / 100.0 * magnus_tetens_svp(t2m);  // actual vapour pressure, hPa
    st.rh_adj = std::clamp(vp / magnus_tetens_svp(st.t_adj) * 100.0, 0.0, 100.0);
    return st;
}

} // namespace umc
