#include "umc/radiation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

namespace umc {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kDeg = kPi / 180.0;

bool ray_tri(const Vec3& o, const Vec3& d, const Vec3& a, const Vec3& b, const Vec3& c,
             double t_min, double& t_out) {
    // Moeller-Trumbore
    Vec3 e1 = b - a, e2 = c - a;
    Vec3 p = d.cross(e2);
    double det = e1.dot(p);
    if (std::abs(det) < 1e-12) return false;
    double inv = 1.0 / det;
    Vec3 s = o - a;
    double u = s.dot(p) * inv;
    if (u < -1e-9 || u > 1.0 + 1e-9) return false;
    Vec3 q = s.cross(e1);
    double v = d.dot(q) * inv;
    if (v < -1e-9 || u + v > 1.0 + 1e-9) return false;
    double t = e2.dot(q) * inv;
    if (t <= t_min) return false;
    t_out = t;
    return true;
}

bool ray_box(const Vec3& o, const Vec3& inv_d, const Aabb& b, double t_best) {
    double t0 = 0.0, t1 = t_best;
    for (int k = 0; k < 3; ++k) {
        double ok = k == 0 ? o.x : k == 1 ? o.y : o.z;
        double ik = k == 0 ? inv_d.x : k == 1 ? inv_d.y : inv_d.z;
        double lo = k == 0 ? b.lo.x : k == 1 ? b.lo.y : b.lo.z;
        double hi = k == 0 ? b.hi.x : k == 1 ? b.hi.y : b.hi.z;
        double ta = (lo - ok) * ik, tb = (hi - ok) * ik;
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
        if (t0 > t1) return false;
    }
    return true;
}

} // namespace

void RayScene::add_mesh(const TriangleMesh& mesh, int face_id_base) {
    for (size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        tris_.push_back({mesh.vertices[tri[0]], mesh.vertices[tri[1]],
                         mesh.vertices[tri[2]], face_id_base + static_cast<int>(t)});
    }
}

int RayScene::build_node(int first, int count) {
    Node node;
    node.first = first;
    node.count = count;
    node.left = node.right = -1;
    for (int i = first; i < first + count; ++i) {
        node.box.expand(tris_[i].a);
        node.box.expand(tris_[i].b);
        node.box.expand(tris_[i].c);
    }
    int index = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    if (count <= 4) return index;

    Vec3 ext = node.box.extent();
    int axis = ext.x >= ext.y && ext.x >= ext.z ? 0 : (ext.y >= ext.z ? 1 : 2);
    auto key = [axis](const Tri& t) {
        Vec3 c = (t.a + t.b + t.c) * (1.0 / 3.0);
        return axis == 0 ? c.x : axis == 1 ? c.y : c.z;
    };
    std::nth_element(tris_.begin() + first, tris_.begin() + first + count / 2,
                     tris_.begin() + first + count,
                     [&](const Tri& x, const Tri& y) { return key(x) < key(y); });
    int mid = count / 2;
    int left = build_node(first, mid);
    int right = build_node(first + mid, count - mid);
    nodes_[index].left = left;
    nodes_[index].right = right;
    nodes_[index].count = 0;
    return index;
}

void RayScene::build() {
    nodes_.clear();
    if (!tris_.empty()) build_node(0, static_cast<int>(tris_.size()));
}

int RayScene::first_hit(const Vec3& origin, const Vec3& dir, double t_min) const {
    if (nodes_.empty()) return -1;
    Vec3 inv{1.0 / (dir.x == 0 ? 1e-300 : dir.x), 1.0 / (dir.y == 0 ? 1e-300 : dir.y),
             1.0 / (dir.z == 0 ? 1e-300 : dir.z)};
    double t_best = std::numeric_limits<double>::max();
    int best = -1;
    int stack[64];
    int sp = 0;
    stack[sp++] = 0;
    while (sp > 0) {
        const Node& n = nodes_[stack[--sp]];
        if (!ray_box(origin, inv, n.box, t_best)) continue;
        if (n.count > 0) {
            for (int i = n.first; i < n.first + n.count; ++i) {
                double t;
                if (ray_tri(origin, dir, tris_[i].a, tris_[i].b, tris_[i].c, t_min, t) &&
                    t < t_best) {
                    t_best = t;
                    best = tris_[i].id;
                }
            }
        } else {
            stack[sp++] = n.left;
            stack[sp++] = n.right;
        }
    }
    return best;
}

Vec3 sun_direction(double azimuth_deg, double elevation_deg) {
    double az = azimuth_deg * kDeg, el = elevation_deg * kDeg;
    return {std::sin(az) * std::cos(el), std::cos(az) * std::cos(el), std::sin(el)};
}

SvfResult compute_svf(const RayScene& scene, const Vec3& point, const Vec3& normal,
                      int n_samples, uint32_t seed) {
    if (n_samples < 16) throw std::runtime_error("svf needs >= 16 samples");
    Vec3 n = normal.normalized();
    // orthonormal frame about n
    Vec3 helper = std::abs(n.z) < 0.9 ? Vec3{0, 0, 1} : Vec3{1, 0, 0};
    Vec3 t1 = n.cross(helper).normalized();
    Vec3 t2 = n.cross(t1);

    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::map<int, uint32_t> hist;
    int escaped = 0;
    for (int s = 0; s < n_samples; ++s) {
        double r1 = uni(rng), r2 = uni(rng);
        double phi = 2.0 * kPi * r1;
        double r = std::sqrt(r2);
        Vec3 dir = t1 * (r * std::cos(phi)) + t2 * (r * std::sin(phi)) +
                   n * std::sqrt(std::max(0.0, 1.0 - r2));
        int hit = scene.first_hit(point, dir);
        if (hit < 0 && dir.z > 0.0)
            ++escaped;  // reaches the sky
        else if (hit >= 0)
            hist[hit]++;
        // downward escape (no geometry, no sky) counts as blocked horizon
    }
    SvfResult res;
    res.svf = static_cast<double>(escaped) / n_samples;
    res.hits.assign(hist.begin(), hist.end());
    return res;
}

bool shadow_test(const RayScene& scene, const Vec3& point, const Vec3& sun_dir) {
    if (sun_dir.z <= 0.0) return false;  // sun below horizon: nothing is lit
    return !scene.occluded(point, sun_dir);
}

double shortwave_in(bool lit, double cos_incidence, double dni, double dhi,
                    double cos_zenith, double svf, double rho_context) {
    double direct = lit ? dni * std::max(0.0, cos_incidence) : 0.0;
    double diffuse = dhi * svf;
    double reflected =
        rho_context * (dni * std::max(0.0, cos_zenith) + dhi) * (1.0 - svf);
    return direct + diffuse + reflected;
}

LwExchange longwave_exchange(double emissivity, double t_surf_k, double t_surround_k,
                             double t_air_k, double svf, double sky_emissivity) {
    LwExchange lw;
    lw.q_in = svf * sky_emissivity * kStefanBoltzmann * std::pow(t_air_k, 4) +
              (1.0 - svf) * kStefanBoltzmann * std::pow(t_surround_k, 4);
    lw.q_out = emissivity * kStefanBoltzmann * std::pow(t_surf_k, 4);
    return lw;
}

double convective_coefficient(double wind_speed, double a, double b) {
    return a + b * std::max(0.0, wind_speed);
}

double step_face_temperature(double t_surf_k, double c_areal, double q_sw,
                             double q_lw_in, double emissivity, double h_conv,
                             double t_air_k, double dt_s) {
    if (dt_s <= 0.0) throw std::runtime_error("dt must be > 0");
    if (c_areal <= 0.0) throw std::runtime_error("areal heat capacity must be > 0");
    double t0 = t_surf_k;
    double emit0 = emissivity * kStefanBoltzmann * std::pow(t0, 4);
    double demit = 4.0 * emissivity * kStefanBoltzmann * std::pow(t0, 3);
    double cap = c_areal / dt_s;
    double t_new = (cap * t0 + q_sw + q_lw_in - emit0 + demit * t0 + h_conv * t_air_k) /
                   (cap + demit + h_conv);
    if (t_new < 200.0 || t_new > 400.0)
        throw std::runtime_error(
            "surface temperature diverged: T = " + std::to_string(t_new) +
            " K (q_sw = " + std::to_string(q_sw) + ", q_lw_in = " +
            std::to_string(q_lw_in) + ", H = " + std::to_string(h_conv) + ")");
    return t_new;
}

double mrt_at_point(const MrtPointInputs& in) {
    double reflected =
        in.rho_surround * (in.dni * std::max(0.0, in.cos_zenith) + in.dhi) *
            (1.0 - in.svf) +
        0.5 * in.rho_ground *
            ((in.ground_lit ? in.dni * std::max(0.0, in.cos_zenith) : 0.0) +
             in.dhi * in.svf);
    double s_sw = in.alpha_sw * ((in.lit ? in.f_projected * in.dni : 0.0) +
                                 in.dhi * in.svf + reflected);
    double s_lw = in.alpha_lw *
                  (in.svf * in.sky_emissivity * kStefanBoltzmann * std::pow(in.t_air_k, 4) +
                   (1.0 - in.svf) * kStefanBoltzmann * std::pow(in.t_surround_k, 4));
    double s = s_sw + s_lw;
    return std::pow(s / (in.alpha_lw * kStefanBoltzmann), 0.25) - 273.15;
}

} // namespace umc
