#include "umc/comfort.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

#include "umc/windflow.hpp"  // magnus_tetens_svp

namespace umc {

namespace {

constexpr double kSigma = 5.67e-8;
constexpr double kCair = 1010.0;
constexpr double kLvap = 2.42e6;
constexpr double kPatm = 1013.25;
constexpr double kEmSkin = 0.99;
constexpr double kEmCloth = 0.95;
constexpr double kFeff = 0.725;          // effective radiating fraction, standing
constexpr double kRhoCb = 1.06 * 3640.0; // blood density * heat capacity, J/(L K)
constexpr double kSweatGain = 304.94;    // g/(m2 h K)
constexpr double kCloResistance = 0.155; // m2K/W per clo

struct BodyModel {
    const PersonParams& p;
    double adu;    // DuBois surface, m2
    double h_met;  // metabolic heat, W
    double facl;   // clothed fraction
    double acl;    // clothed surface, m2
    double abare;  // bare surface, m2
    double rcl;    // clothing resistance, m2K/W

    explicit BodyModel(const PersonParams& person) : p(person) {
        adu = 0.203 * std::pow(p.weight_kg, 0.425) * std::pow(p.height_m, 0.725);
        double ht_cm = p.height_m * 100.0;
        double basal;
        if (p.male)
            basal = 3.45 * std::pow(p.weight_kg, 0.75) *
                    (1 + 0.004 * (30 - p.age) +
                     0.010 * (ht_cm / std::cbrt(p.weight_kg) - 43.4));
        else
            basal = 3.19 * std::pow(p.weight_kg, 0.75) *
                    (1 + 0.004 * (30 - p.age) +
                     0.018 * (ht_cm / std::cbrt(p.weight_kg) - 42.1));
        h_met = basal + p.work_w;
        double clo = p.clo;
        facl = std::clamp(
            (-2.36 + 173.51 * clo - 100.76 * clo * clo + 19.28 * clo * clo * clo) / 100.0,
            0.0, 1.0);
        double fcl = 1.0 + 0.15 * clo;
        acl = adu * facl * fcl;
        abare = adu * (1.0 - facl);
        rcl = clo * kCloResistance;
    }
};

double h_convective(double v) {
    return 2.67 + 6.5 * std::pow(std::max(v, 0.1), 0.67);
}

double respiration(double ta, double vpa, double h_met) {
    double tex = 0.47 * ta + 21.0;
    double rtv = 1.44e-6 * h_met;
    double eres = kCair * (ta - tex) * rtv;
    double vpex = 6.11 * std::pow(10.0, 7.45 * tex / (235.0 + tex));
    double erel = 0.623 * kLvap / kPatm * (vpa - vpex) * rtv;
    return eres + erel;
}

double sweat_rate(double t_cr, double t_sk, const BodyModel& body) {
    double tbody = 0.1 * t_sk + 0.9 * t_cr;
    double sw = kSweatGain * (tbody - 36.6) * body.adu / 3.6e6;  // kg/s
    if (!body.p.male) sw *= 0.7;
    return std::max(sw, 0.0);
}

double bisect(double lo, double hi, double tol, const std::function<double(double)>& f,
              const char* what) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (flo * fhi > 0.0)
        throw std::runtime_error(std::string("PET balance failed to bracket: ") + what);
    for (int it = 0; it < 200 && hi - lo > tol; ++it) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid);
        if (fm == 0.0) return mid;
        if (flo * fm < 0.0) { hi = mid; fhi = fm; }
        else { lo = mid; flo = fm; }
    }
    return 0.5 * (lo + hi);
}

// Clothing-surface temperature closing conduction = radiation + convection.
double solve_tcl(const BodyModel& body, double ta, double tmrt, double hc, double t_sk) {
    double tmrt_k4 = std::pow(tmrt + 273.15, 4);
    auto resid = [&](double t_cl) {
        double cond = body.acl * (t_sk - t_cl) / (body.rcl / body.facl);
        double rad = body.acl * kEmCloth * kSigma * kFeff *
                     (tmrt_k4 - std::pow(t_cl + 273.15, 4));
        double conv = hc * (ta - t_cl) * body.acl;
        return cond + rad + conv;
    };
    return bisect(-150.0, 250.0, 1e-5, resid, "clothing surface");
}

// Core temperature at which blood transport carries `target` to the skin.
double solve_core(const BodyModel& body, double t_sk, double target) {
    auto resid = [&](double t_cr) {
        double vb = (6.3 + 75.0 * std::max(0.0, t_cr - 36.6)) /
                    (1.0 + 0.5 * std::max(0.0, 34.0 - t_sk));
        vb = std::min(vb, 90.0);
        return vb * kRhoCb * (t_cr - t_sk) * body.adu / 3600.0 - target;
    };
    return bisect(t_sk + 1e-9, 120.0, 1e-6, resid, "core transport");
}

struct SurfaceFluxes { double sensible = 0.0, evaporative = 0.0; };

// Skin + clothing sensible exchange and evaporation; gains positive.
SurfaceFluxes surface_fluxes(const BodyModel& body, double ta, double tmrt, double hc,
                             double vpa, double t_sk, double t_cl, double sweat_kg_s) {
    SurfaceFluxes f;
    double tmrt_k4 = std::pow(tmrt + 273.15, 4);
    double r_bare =
        body.abare * kEmSkin * kSigma * kFeff * (tmrt_k4 - std::pow(t_sk + 273.15, 4));
    double r_clo = body.acl * kEmCloth * kSigma * kFeff *
                   (tmrt_k4 - std::pow(t_cl + 273.15, 4));
    double c_bare = hc * (ta - t_sk) * body.abare;
    double c_clo = hc * (ta - t_cl) * body.acl;
    f.sensible = r_bare + r_clo + c_bare + c_clo;

    double fpcl = 1.0 / (1.0 + 0.92 * hc * body.rcl);  // clothing permeation
    double he_eff = 1.65 * hc * ((1.0 - body.facl) + body.facl * fpcl);
    double vpts = magnus_tetens_svp(t_sk);
    double emax = he_eff * (vpa - vpts) * body.adu;   // <= 0 normally
    double esw_req = -sweat_kg_s * kLvap;
    double wet = emax < 0.0 ? std::min(1.0, esw_req / emax) : 0.0;
    f.evaporative = wet * emax + 0.06 * (1.0 - wet) * emax;
    return f;
}

struct BodyState { double t_cr, t_sk, sweat; };

BodyState solve_actual(const BodyModel& body, double ta, double tmrt, double v,
                       double vpa) {
    double hc = h_convective(v);
    double ere = respiration(ta, vpa, body.h_met);
    double fcs = body.h_met + ere;  // core balance: everything metabolic goes to skin
    auto resid = [&](double t_sk) {
        double t_cr = solve_core(body, t_sk, fcs);
        double sw = sweat_rate(t_cr, t_sk, body);
        double t_cl = solve_tcl(body, ta, tmrt, hc, t_sk);
        SurfaceFluxes f = surface_fluxes(body, ta, tmrt, hc, vpa, t_sk, t_cl, sw);
        // skin node: inflow from core + bare-skin exchange + evaporation
        //            - conduction into clothing
        double cond = body.acl * (t_sk - t_cl) / (body.rcl / body.facl);
        double r_bare = body.abare * kEmSkin * kSigma * kFeff *
                        (std::pow(tmrt + 273.15, 4) - std::pow(t_sk + 273.15, 4));
        double c_bare = hc * (ta - t_sk) * body.abare;
        return fcs + r_bare + c_bare + f.evaporative - cond;
    };
    double t_sk = bisect(0.5, 75.0, 1e-4, resid, "skin temperature");
    double t_cr = solve_core(body, t_sk, fcs);
    return {t_cr, t_sk, sweat_rate(t_cr, t_sk, body)};
}

} // namespace

double pet(double t_air_c, double mrt_c, double wind_ms, double rh_pct,
           const PersonParams& person) {
    if (rh_pct < 0.0 || rh_pct > 100.0)
        throw std::runtime_error("relative humidity out of [0,100]");
    BodyModel body(person);
    double vpa = rh_pct / 100.0 * magnus_tetens_svp(t_air_c);
    BodyState st = solve_actual(body, t_air_c, mrt_c, std::max(wind_ms, 0.1), vpa);

    // reference environment: MRT = Ta, v = 0.1 m/s, vp = 12 hPa
    const double v_ref = 0.1, vpa_ref = 12.0;
    double hc_ref = h_convective(v_ref);
    auto total_balance = [&](double ta_ref) {
        double t_cl = solve_tcl(body, ta_ref, ta_ref, hc_ref, st.t_sk);
        SurfaceFluxes f =
            surface_fluxes(body, ta_ref, ta_ref, hc_ref, vpa_ref, st.t_sk, t_cl, st.sweat);
        return body.h_met + respiration(ta_ref, vpa_ref, body.h_met) + f.sensible +
               f.evaporative;
    };
    return bisect(-100.0, 200.0, 0.01, total_balance, "reference environment");
}

double face_cooling_flux(const std::vector<double>& t_surf_history_c,
                         const WallProps& wall, size_t hour) {
    if (t_surf_history_c.empty())
        throw std::runtime_error("empty surface temperature history");
    double weighted = 0.0;
    for (size_t k = 0; k < wall.ctf_weights.size(); ++k) {
        size_t idx = hour >= k ? hour - k : 0;  // pre-history clamps to first sample
        idx = std::min(idx, t_surf_history_c.size() - 1);
        weighted += wall.ctf_weights[k] * (t_surf_history_c[idx] - wall.setpoint_c);
    }
    return std::max(0.0, wall.u_value * weighted);
}

BuildingEnergy building_cooling_load(const std::string& id,
                                     const std::vector<double>& face_areas_m2,
                                     const std::vector<std::vector<double>>& flux_series,
                                     double envelope_area_m2, double dt_hours) {
    if (envelope_area_m2 <= 0.0)
        throw std::runtime_error("building " + id + " has zero envelope area");
    if (face_areas_m2.size() != flux_series.size())
        throw std::runtime_error("face/flux series size mismatch");
    BuildingEnergy e;
    e.id = id;
    e.envelope_area_m2 = envelope_area_m2;
    size_t hours = flux_series.empty() ? 0 : flux_series.front().size();
    e.hourly_power_w.assign(hours, 0.0);
    for (size_t f = 0; f < flux_series.size(); ++f)
        for (size_t h = 0; h < hours; ++h)
            e.hourly_power_w[h] += flux_series[f][h] * face_areas_m2[f];
    for (double p : e.hourly_power_w) e.daily_energy_kwh += p * dt_hours / 1000.0;
    e.eui_kwh_m2 = e.daily_energy_kwh / envelope_area_m2;
    return e;
}

std::vector<Hotspot> hotspot_scan(const std::vector<ComfortGrid>& hourly,
                                  const BuildingSet& buildings,
                                  const HotspotThresholds& thresholds) {
    if (hourly.empty()) throw std::runtime_error("no comfort grids to scan");
    std::vector<Hotspot> spots;
    for (const auto& g : hourly) {
        bool found = false;
        Hotspot best;
        for (int j = 0; j < g.ny; ++j) {
            for (int i = 0; i < g.nx; ++i) {
                size_t k = g.idx(i, j);
                if (!g.valid[k]) continue;
                double x = g.origin_x + (i + 0.5) * g.cell_size;
                double y = g.origin_y + (j + 0.5) * g.cell_size;
                bool better = !found || g.pet_c[k] > best.pet_c ||
                              (g.pet_c[k] == best.pet_c &&
                               (x < best.x || (x == best.x && y < best.y)));
                if (!better) continue;
                found = true;
                best.x = x;
                best.y = y;
                best.hour = g.hour;
                best.pet_c = g.pet_c[k];
                best.mrt_c = g.mrt_c[k];
                best.causes.clear();
                if (g.wind_ms[k] < thresholds.low_wind_ms)
                    best.causes.push_back("low wind");
                if (g.svf[k] > thresholds.high_svf) best.causes.push_back("high svf");
                if (g.reflected_sw[k] > thresholds.reflected_wm2)
                    best.causes.push_back("reflected gain");
            }
        }
        if (!found) continue;
        // two nearest buildings by footprint distance
        std::vector<std::pair<double, std::string>> near;
        for (const auto& b : buildings.buildings)
            near.push_back({b.footprint_distance(best.x, best.y), b.id});
        std::sort(near.begin(), near.end());
        for (size_t k = 0; k < near.size() && k < 2; ++k)
            best.nearest_buildings.push_back(near[k].second);
        spots.push_back(best);
    }
    if (spots.empty()) throw std::runtime_error("all comfort grid points invalid");
    std::stable_sort(spots.begin(), spots.end(), [](const Hotspot& a, const Hotspot& b) {
        if (a.pet_c != b.pet_c) return a.pet_c > b.pet_c;
        if (a.hour != b.hour) return a.hour < b.hour;
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    });
    return spots;
}

std::vector<BuildingEnergy> energy_outliers(std::vector<BuildingEnergy> energies,
                                            double sigma_factor) {
    std::sort(energies.begin(), energies.end(),
              [](const BuildingEnergy& a, const BuildingEnergy& b) {
                  return a.eui_kwh_m2 != b.eui_kwh_m2 ? a.eui_kwh_m2 > b.eui_kwh_m2
                                                      : a.id < b.id;
              });
    if (energies.size() < 2) return energies;
    double mean = 0.0;
    for (const auto& e : energies) mean += e.eui_kwh_m2;
    mean /= energies.size();
    double var = 0.0;
    for (const auto& e : energies) var += (e.eui_kwh_m2 - mean) * (e.eui_kwh_m2 - mean);
    double stdev = std::sqrt(var / energies.size());
    for (auto& e : energies)
        e.outlier = stdev > 0.0 && e.eui_kwh_m2 > mean + sigma_factor * stdev;
    return energies;
}

} // namespace umc
