#include "umc/orchestrator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <httplib.h>

namespace fs = std::filesystem;

namespace umc {

namespace {

std::string now_iso8601() {
    auto t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

bool has_word(const std::string& haystack, const std::string& needle) {
    return haystack.find(needle) != std::string::npos;
}

std::string height_label(double h) {
    char buf[32];
    if (std::abs(h - std::round(h)) < 1e-9)
        std::snprintf(buf, sizeof(buf), "%d", static_cast<int>(std::llround(h)));
    else
        std::snprintf(buf, sizeof(buf), "%g", h);
    return buf;
}

} // namespace

std::string format_fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

// ---------------------------------------------------------------- recorder

InteractionRecorder::InteractionRecorder(std::string json_path, std::string log_path)
    : json_path_(std::move(json_path)), log_path_(std::move(log_path)) {
    rewrite_json();
    std::ofstream log(log_path_, std::ios::trunc);
    if (!log) throw std::runtime_error("cannot open interaction log: " + log_path_);
}

void InteractionRecorder::rewrite_json() const {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : records_) {
        arr.push_back({{"stage", r.stage},
                       {"prompt", r.prompt},
                       {"response", r.response},
                       {"latency_ms", r.latency_ms},
                       {"timestamp", r.timestamp}});
    }
    std::ofstream out(json_path_, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write interaction log: " + json_path_);
    out << arr.dump(2) << "\n";
    out.flush();
    if (!out) throw std::runtime_error("interaction log write failed: " + json_path_);
}

void InteractionRecorder::record(const std::string& stage, const std::string& prompt,
                                 const std::string& response, double latency_ms) {
    InteractionRecord r{stage, prompt, response, latency_ms, now_iso8601()};
    records_.push_back(r);
    rewrite_json();
    std::ofstream log(log_path_, std::ios::app);
    if (!log) throw std::runtime_error("cannot append interaction log: " + log_path_);
    log << "=== stage: " << r.stage << " @ " << r.timestamp << " ("
        << format_fixed(r.latency_ms, 1) << " ms)\n"
        << "--- prompt\n" << r.prompt << "\n"
        << "--- response\n" << r.response << "\n\n";
    log.flush();
    if (!log) throw std::runtime_error("interaction log append failed: " + log_path_);
}

// ---------------------------------------------------------------- advisors

nlohmann::json DeterministicAdvisor::ask(const std::string& stage,
                                         const nlohmann::json& request) {
    if (stage == "intent") {
        const std::string q = lower(request.at("query").get<std::string>());
        bool wind = has_word(q, "wind") || has_word(q, "cfd") || has_word(q, "ventilation");
        bool radiation = has_word(q, "solar") || has_word(q, "radiation") ||
                         has_word(q, "shade") || has_word(q, "shading");
        bool comfort = has_word(q, "comfort") || has_word(q, "pet") ||
                       has_word(q, "hotspot") || has_word(q, "heat stress");
        bool energy = has_word(q, "energy") || has_word(q, "cooling") ||
                      has_word(q, "inefficien");
        bool mitigation = has_word(q, "material") || has_word(q, "albedo") ||
                          has_word(q, "mitigat") || has_word(q, "retrofit");
        if (has_word(q, "audit")) { wind = radiation = comfort = energy = true; }
        if (mitigation) { comfort = energy = true; }
        if (comfort) { wind = radiation = true; }
        if (energy) { radiation = true; }

        nlohmann::json analyses = nlohmann::json::array();
        if (wind) analyses.push_back("wind");
        if (radiation) analyses.push_back("radiation");
        if (comfort) analyses.push_back("comfort");
        if (energy) analyses.push_back("energy");
        if (mitigation) analyses.push_back("mitigation");

        nlohmann::json suggested = nlohmann::json::object();
        std::string rationale = "keyword-rule plan";
        if (has_word(q, "inter-monsoon") || has_word(q, "intermonsoon")) {
            suggested["timestamp"] = mitigation ? "04-15" : "04-20";
            rationale += "; inter-monsoon season mapped to a mid-April representative day";
        }
        return {{"analyses", analyses},
                {"suggested_params", suggested},
                {"rationale", rationale}};
    }
    if (stage == "materials") {
        // deterministic backend keeps the heuristic proposal as-is
        return {{"targets", request.at("proposed_targets")},
                {"albedo_roof", request.at("albedo_roof")},
                {"albedo_wall", request.at("albedo_wall")},
                {"albedo_ground", request.at("albedo_ground")},
                {"rationale", "heuristic selection accepted"}};
    }
    throw std::runtime_error("unknown advisor stage: " + stage);
}

RemoteAdvisor::RemoteAdvisor(std::string url, std::string model, double timeout_s)
    : url_(std::move(url)), model_(std::move(model)), timeout_s_(timeout_s) {}

nlohmann::json RemoteAdvisor::ask(const std::string& stage,
                                  const nlohmann::json& request) {
    // split http://host:port/path into base + path
    auto scheme_end = url_.find("://");
    if (scheme_end == std::string::npos)
        throw std::runtime_error("advisor url missing scheme: " + url_);
    auto path_begin = url_.find('/', scheme_end + 3);
    std::string base = path_begin == std::string::npos ? url_ : url_.substr(0, path_begin);
    std::string path = path_begin == std::string::npos ? "/" : url_.substr(path_begin);

    httplib::Client client(base);
    client.set_connection_timeout(static_cast<int>(timeout_s_), 0);
    client.set_read_timeout(static_cast<int>(timeout_s_), 0);
    httplib::Headers headers;
    if (const char* key = std::getenv("UMC_ADVISOR_KEY"))
        headers.emplace("Authorization", std::string("Bearer ") + key);

    nlohmann::json body{
        {"model", model_},
        {"messages",
         {{{"role", "system"},
           {"content", "Respond with one strict JSON object and nothing else."}},
          {{"role", "user"},
           {"content", nlohmann::json{{"stage", stage}, {"request", request}}.dump()}}}}};
    auto res = client.Post(path, headers, body.dump(), "application/json");
    if (!res || res->status != 200)
        throw std::runtime_error("advisor request failed: " +
                                 (res ? "http " + std::to_string(res->status)
                                      : "no response"));
    auto payload = nlohmann::json::parse(res->body);
    std::string content =
        payload.at("choices").at(0).at("message").at("content").get<std::string>();
    return nlohmann::json::parse(content);
}

// ---------------------------------------------------------------- intent

namespace {

IntentPlan parse_intent_response(const nlohmann::json& resp, const std::string& note) {
    if (!resp.is_object() || !resp.contains("analyses") || !resp["analyses"].is_array())
        throw std::runtime_error("intent response violates schema");
    IntentPlan plan;
    for (const auto& a : resp["analyses"]) {
        std::string name = a.get<std::string>();
        if (name == "wind") plan.wind = true;
        else if (name == "radiation") plan.radiation = true;
        else if (name == "comfort") plan.comfort = true;
        else if (name == "energy") plan.energy = true;
        else if (name == "mitigation") plan.mitigation = true;
        else throw std::runtime_error("intent response names unknown analysis: " + name);
    }
    if (plan.mitigation) { plan.comfort = plan.energy = true; }
    if (resp.contains("suggested_params")) {
        if (!resp["suggested_params"].is_object())
            throw std::runtime_error("intent response violates schema");
        for (auto it = resp["suggested_params"].begin();
             it != resp["suggested_params"].end(); ++it)
            plan.suggested.set(it.key(), it.value(), note);
    }
    if (resp.contains("rationale")) plan.rationale = resp["rationale"].get<std::string>();
    return plan;
}

nlohmann::json timed_ask(Advisor& advisor, InteractionRecorder& recorder,
                         const std::string& stage, const nlohmann::json& request) {
    auto t0 = std::chrono::steady_clock::now();
    std::string response_text;
    try {
        nlohmann::json resp = advisor.ask(stage, request);
        response_text = resp.dump();
        double ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0).count();
        recorder.record(stage, request.dump(), response_text, ms);
        return resp;
    } catch (const std::exception& e) {
        double ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0).count();
        recorder.record(stage, request.dump(),
                        std::string("<error> ") + e.what(), ms);
        throw;
    }
}

} // namespace

IntentPlan analyze_intent(const std::string& query, Advisor& advisor,
                          InteractionRecorder& recorder) {
    if (query.empty()) throw std::runtime_error("empty query");
    nlohmann::json request{{"query", query}};
    const std::string note = "advisor:" + advisor.name();

    IntentPlan plan;
    bool resolved = false;
    for (int attempt = 0; attempt < 2 && !resolved; ++attempt) {
        try {
            plan = parse_intent_response(timed_ask(advisor, recorder, "intent", request),
                                         note);
            resolved = true;
        } catch (const std::exception& e) {
            std::cerr << "warning: advisor intent attempt " << attempt + 1
                      << " failed: " << e.what() << "\n";
        }
    }
    if (!resolved) {
        std::cerr << "warning: falling back to deterministic intent rules\n";
        DeterministicAdvisor fallback;
        plan = parse_intent_response(
            timed_ask(fallback, recorder, "intent", request), "advisor:deterministic");
    }
    if (!plan.wind && !plan.radiation && !plan.comfort && !plan.energy &&
        !plan.mitigation)
        throw std::runtime_error("no analysis derivable from query: " + query);
    return plan;
}

// ---------------------------------------------------------------- materials

MaterialPlan propose_materials(const RunMetrics& baseline, const BuildingSet& set,
                               const ResolvedParams& params, Advisor* advisor,
                               InteractionRecorder* recorder) {
    if (baseline.building_energies.empty())
        throw std::runtime_error("baseline metrics carry no building energies");

    const size_t top_n = static_cast<size_t>(params.get_int("mitigation_top_n"));
    const double radius = params.get_double("mitigation_radius_m");

    auto sorted = baseline.building_energies;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
        if (a.eui_kwh_m2 != b.eui_kwh_m2) return a.eui_kwh_m2 > b.eui_kwh_m2;
        return a.id < b.id;
    });

    MaterialPlan plan;
    plan.albedo_roof = params.get_double("mitigation_albedo_roof");
    plan.albedo_wall = params.get_double("mitigation_albedo_wall");
    plan.albedo_ground = params.get_double("mitigation_albedo_ground");

    std::set<std::string> chosen;
    for (size_t i = 0; i < sorted.size() && i < top_n; ++i) {
        chosen.insert(sorted[i].id);
        plan.rationale[sorted[i].id] = "high cooling intensity (EUI rank " +
                                       std::to_string(i + 1) + ")";
    }
    for (const auto& h : baseline.hotspots) {
        for (const auto& b : set.buildings) {
            if (b.footprint_distance(h.x, h.y) <= radius) {
                auto [it, inserted] = chosen.emplace(b.id);
                std::string why = "within " + format_fixed(radius, 0) +
                                  " m of a thermal hotspot";
                if (inserted) plan.rationale[b.id] = why;
            }
        }
    }
    plan.targets.assign(chosen.begin(), chosen.end());

    if (advisor && recorder) {
        nlohmann::json request{{"proposed_targets", plan.targets},
                               {"albedo_roof", plan.albedo_roof},
                               {"albedo_wall", plan.albedo_wall},
                               {"albedo_ground", plan.albedo_ground}};
        try {
            auto resp = timed_ask(*advisor, *recorder, "materials", request);
            auto take = [&](const char* key, double& slot) {
                if (!resp.contains(key)) return;
                double v = resp[key].get<double>();
                if (v < 0.0 || v > 1.0) {
                    std::cerr << "warning: advisor " << key << "=" << v
                              << " outside [0,1], keeping heuristic value\n";
                    return;
                }
                slot = v;
            };
            take("albedo_roof", plan.albedo_roof);
            take("albedo_wall", plan.albedo_wall);
            take("albedo_ground", plan.albedo_ground);
        } catch (const std::exception& e) {
            std::cerr << "warning: material advisor failed, keeping heuristic plan: "
                      << e.what() << "\n";
        }
    }
    return plan;
}

// ---------------------------------------------------------------- compare

namespace {

const ComfortGrid* grid_for_hour(const std::vector<ComfortGrid>& grids, int hour) {
    for (const auto& g : grids)
        if (g.hour == hour) return &g;
    return nullptr;
}

double grid_sample(const ComfortGrid& g, const std::vector<double>& field,
                   double x, double y) {
    int i = std::clamp(static_cast<int>(std::floor((x - g.origin_x) / g.cell_size)),
                       0, g.nx - 1);
    int j = std::clamp(static_cast<int>(std::floor((y - g.origin_y) / g.cell_size)),
                       0, g.ny - 1);
    return field[g.idx(i, j)];
}

bool grid_lit(const ComfortGrid& g, double x, double y) {
    int i = std::clamp(static_cast<int>(std::floor((x - g.origin_x) / g.cell_size)),
                       0, g.nx - 1);
    int j = std::clamp(static_cast<int>(std::floor((y - g.origin_y) / g.cell_size)),
                       0, g.ny - 1);
    return !g.lit.empty() && g.lit[g.idx(i, j)] != 0;
}

} // namespace

DeltaMetrics compare_runs(const RunMetrics& baseline, const RunMetrics& mitigated,
                          const std::vector<ComfortGrid>& baseline_grids,
                          const std::vector<ComfortGrid>& mitigated_grids) {
    DeltaMetrics d;
    std::map<std::string, const BuildingEnergy*> after;
    for (const auto& b : mitigated.building_energies) after[b.id] = &b;
    if (after.size() != baseline.building_energies.size())
        throw std::runtime_error("building sets differ between runs");

    for (const auto& b : baseline.building_energies) {
        auto it = after.find(b.id);
        if (it == after.end())
            throw std::runtime_error("building missing from mitigated run: " + b.id);
        BuildingDelta bd;
        bd.id = b.id;
        bd.before_kwh = b.daily_energy_kwh;
        bd.after_kwh = it->second->daily_energy_kwh;
        bd.reduction_pct = bd.before_kwh > 0.0
                               ? (bd.before_kwh - bd.after_kwh) / bd.before_kwh * 100.0
                               : 0.0;
        d.buildings.push_back(bd);
        d.total_before_kwh += bd.before_kwh;
        d.total_after_kwh += bd.after_kwh;
    }
    d.total_reduction_pct =
        d.total_before_kwh > 0.0
            ? (d.total_before_kwh - d.total_after_kwh) / d.total_before_kwh * 100.0
            : 0.0;

    for (const auto& h : baseline.hours)
        d.peak_power_before_w = std::max(d.peak_power_before_w, h.total_cooling_power_w);
    for (const auto& h : mitigated.hours)
        d.peak_power_after_w = std::max(d.peak_power_after_w, h.total_cooling_power_w);

    double exposed_sum = 0.0;
    int exposed_n = 0;
    for (const auto& h : baseline.hotspots) {
        const ComfortGrid* gb = grid_for_hour(baseline_grids, h.hour);
        const ComfortGrid* gm = grid_for_hour(mitigated_grids, h.hour);
        if (!gb || !gm) continue;
        HotspotDelta hd;
        hd.x = h.x;
        hd.y = h.y;
        hd.hour = h.hour;
        hd.pet_before_c = grid_sample(*gb, gb->pet_c, h.x, h.y);
        hd.pet_after_c = grid_sample(*gm, gm->pet_c, h.x, h.y);
        hd.delta_pet_c = hd.pet_after_c - hd.pet_before_c;
        hd.sun_exposed = grid_lit(*gb, h.x, h.y);
        if (hd.sun_exposed) {
            exposed_sum += hd.delta_pet_c;
            ++exposed_n;
        }
        d.hotspots.push_back(hd);
    }
    bool cooling_fell = d.total_after_kwh < d.total_before_kwh;
    d.albedo_penalty =
        cooling_fell && exposed_n > 0 && (exposed_sum / exposed_n) > 0.1;
    return d;
}

nlohmann::ordered_json DeltaMetrics::to_json() const {
    nlohmann::ordered_json j;
    j["total_before_kwh"] = total_before_kwh;
    j["total_after_kwh"] = total_after_kwh;
    j["total_reduction_pct"] = total_reduction_pct;
    j["peak_power_before_w"] = peak_power_before_w;
    j["peak_power_after_w"] = peak_power_after_w;
    j["albedo_penalty"] = albedo_penalty;
    auto& jb = j["buildings"] = nlohmann::ordered_json::array();
    for (const auto& b : buildings)
        jb.push_back({{"id", b.id},
                      {"before_kwh", b.before_kwh},
                      {"after_kwh", b.after_kwh},
                      {"reduction_pct", b.reduction_pct}});
    auto& jh = j["hotspots"] = nlohmann::ordered_json::array();
    for (const auto& h : hotspots)
        jh.push_back({{"x_m", h.x},
                      {"y_m", h.y},
                      {"hour", h.hour},
                      {"pet_before_c", h.pet_before_c},
                      {"pet_after_c", h.pet_after_c},
                      {"delta_pet_c", h.delta_pet_c},
                      {"sun_exposed", h.sun_exposed}});
    return j;
}

// ---------------------------------------------------------------- solving

SolveArtifacts solve_scenario(const BuildingSet& set, const ResolvedParams& params,
                              const std::vector<HourForcing>& day,
                              const MaterialOverrides& overrides,
                              const std::string& out_dir,
                              const std::string& prefix) {
    if (day.empty()) throw std::runtime_error("no forcing hours");

    int rep_hour = params.get_int("representative_hour");
    const HourForcing* rep = &day.front();
    for (const auto& f : day)
        if (f.time.hour == rep_hour) rep = &f;

    auto masks = build_masks(set, params);
    WindVolume wind = solve_wind(masks, std::max(rep->wind_speed_10m, 0.1),
                                 rep->wind_dir_deg, params);

    SurfaceSimulator surfaces(set, params, overrides);
    surfaces.run_day(day, wind);

    PedestrianComfort ped(set, surfaces, params);
    SolveArtifacts art;
    art.grids = ped.run_day(day, wind, surfaces);

    HotspotThresholds thresholds;
    thresholds.low_wind_ms = params.get_double("hotspot_wind_threshold_ms");
    thresholds.high_svf = params.get_double("hotspot_svf_threshold");
    thresholds.reflected_wm2 = params.get_double("hotspot_reflected_threshold_wm2");

    art.metrics.hotspots = hotspot_scan(art.grids, set, thresholds);
    art.metrics.building_energies =
        energy_outliers(surfaces.building_energies(set, params),
                        params.get_double("eui_outlier_sigma"));

    for (size_t h = 0; h < day.size(); ++h) {
        HourSummary hs;
        hs.hour = day[h].time.hour;
        hs.t_air_c = day[h].t_air_c;
        hs.wind_speed_ms = day[h].wind_speed_10m;
        hs.ghi_wm2 = day[h].dni * std::max(0.0, std::cos(day[h].sun.zenith *
                                                          3.14159265358979323846 / 180.0)) +
                     day[h].dhi;
        const auto& g = art.grids[h];
        for (size_t k = 0; k < g.pet_c.size(); ++k) {
            if (!g.valid[k]) continue;
            hs.max_pet_c = std::max(hs.max_pet_c, g.pet_c[k]);
            hs.max_mrt_c = std::max(hs.max_mrt_c, g.mrt_c[k]);
        }
        for (const auto& b : art.metrics.building_energies)
            hs.total_cooling_power_w += b.hourly_power_w[h];
        art.metrics.hours.push_back(hs);
        art.metrics.peak_pet_c = std::max(art.metrics.peak_pet_c, hs.max_pet_c);
        art.metrics.peak_mrt_c = std::max(art.metrics.peak_mrt_c, hs.max_mrt_c);
    }

    if (!out_dir.empty()) {
        fs::create_directories(fs::path(out_dir) / prefix);
        auto rel = [&](const std::string& name) { return prefix.empty() ? name : prefix + "/" + name; };
        auto full = [&](const std::string& name) { return (fs::path(out_dir) / rel(name)).string(); };

        for (const auto& slice : wind.slices) {
            FieldGrid g;
            g.origin_x = slice.mask.origin_x;
            g.origin_y = slice.mask.origin_y;
            g.origin_z = slice.height;
            g.spacing = slice.mask.cell_size;
            g.nx = slice.mask.nx;
            g.ny = slice.mask.ny;
            std::vector<double> speed(slice.u.size());
            for (size_t k = 0; k < speed.size(); ++k)
                speed[k] = std::hypot(slice.u[k], slice.v[k]);
            g.scalars.push_back({"speed", speed});
            g.vectors.push_back({"velocity", {slice.u, slice.v}});
            std::string name = "wind_z" + height_label(slice.height) + ".vtk";
            write_vtk_structured(g, full(name));
            art.metrics.files[rel(name)] = rel(name);
        }

        {
            FieldGrid g;
            g.origin_x = ped.origin_x();
            g.origin_y = ped.origin_y();
            g.origin_z = 1.5;
            g.spacing = ped.cell();
            g.nx = ped.nx();
            g.ny = ped.ny();
            g.scalars.push_back({"svf", ped.svf()});
            write_vtk_structured(g, full("svf.vtk"));
            art.metrics.files[rel("svf.vtk")] = rel("svf.vtk");
        }

        std::vector<double> albedo(surfaces.faces().size());
        std::vector<int> bid(surfaces.faces().size());
        for (size_t i = 0; i < surfaces.faces().size(); ++i) {
            albedo[i] = surfaces.faces()[i].albedo;
            bid[i] = surfaces.faces()[i].building;
        }
        for (size_t h = 0; h < day.size(); ++h) {
            std::string name = "surface_T_" + std::to_string(day[h].time.hour) + ".vtk";
            write_vtk_polydata(surfaces.scene_mesh(),
                               {{"T_surf", surfaces.t_surf_c[h]},
                                {"q_sw_in", surfaces.q_sw[h]},
                                {"q_lw_in", surfaces.q_lw_in[h]},
                                {"q_conv", surfaces.q_conv[h]},
                                {"albedo", albedo}},
                               {{"building_id", bid}}, full(name));
            art.metrics.files[rel(name)] = rel(name);

            FieldGrid g;
            g.origin_x = ped.origin_x();
            g.origin_y = ped.origin_y();
            g.origin_z = 1.5;
            g.spacing = ped.cell();
            g.nx = ped.nx();
            g.ny = ped.ny();
            g.scalars.push_back({"pet", art.grids[h].pet_c});
            g.scalars.push_back({"wind_speed", art.grids[h].wind_ms});
            g.scalars.push_back({"reflected_sw", art.grids[h].reflected_sw});
            std::string pet_name = "pet_" + std::to_string(day[h].time.hour) + ".vtk";
            write_vtk_structured(g, full(pet_name));
            art.metrics.files[rel(pet_name)] = rel(pet_name);

            FieldGrid gm = g;
            gm.scalars.clear();
            gm.scalars.push_back({"mrt", art.grids[h].mrt_c});
            std::string mrt_name = "mrt_" + std::to_string(day[h].time.hour) + ".vtk";
            write_vtk_structured(gm, full(mrt_name));
            art.metrics.files[rel(mrt_name)] = rel(mrt_name);
        }

        nlohmann::ordered_json energies = nlohmann::ordered_json::array();
        for (const auto& b : art.metrics.building_energies)
            energies.push_back({{"id", b.id},
                                {"daily_cooling_kwh", b.daily_energy_kwh},
                                {"envelope_area_m2", b.envelope_area_m2},
                                {"eui_kwh_m2", b.eui_kwh_m2},
                                {"outlier", b.outlier}});
        std::ofstream(full("building_energy.json")) << energies.dump(2) << "\n";
        art.metrics.files[rel("building_energy.json")] = rel("building_energy.json");

        nlohmann::ordered_json hot = nlohmann::ordered_json::array();
        for (const auto& h : art.metrics.hotspots)
            hot.push_back({{"x_m", h.x},
                           {"y_m", h.y},
                           {"hour", h.hour},
                           {"pet_c", h.pet_c},
                           {"mrt_c", h.mrt_c},
                           {"nearest_buildings", h.nearest_buildings},
                           {"causes", h.causes}});
        std::ofstream(full("hotspots.json")) << hot.dump(2) << "\n";
        art.metrics.files[rel("hotspots.json")] = rel("hotspots.json");

        std::string metrics_name = rel("metrics.json");
        art.metrics.files[metrics_name] = metrics_name;
        write_metrics(art.metrics, full("metrics.json"));
    }
    return art;
}

// ---------------------------------------------------------------- pipeline

namespace {

Timestamp parse_day_stamp(const std::string& stamp, int hour) {
    int month = 0, day = 0;
    if (std::sscanf(stamp.c_str(), "%d-%d", &month, &day) != 2 || month < 1 ||
        month > 12 || day < 1 || day > 31)
        throw std::runtime_error("bad timestamp parameter: " + stamp);
    return Timestamp{month, day, hour};
}

ParamSource climate_source(const WeatherRecord& rec, const std::string& note) {
    ParamSource src;
    auto put = [&](const char* field, const std::optional<double>& v) {
        if (v) src.set(field, *v, note);
    };
    put("t_air_c", rec.t_air_2m);
    put("rh_pct", rec.rh_2m);
    put("wind_speed_10m_ms", rec.wind_speed_10m);
    put("wind_dir_deg", rec.wind_dir_10m);
    put("ghi_wm2", rec.ghi);
    put("dni_wm2", rec.dni);
    put("dhi_wm2", rec.dhi);
    return src;
}

} // namespace

PipelineState run_pipeline(const RunConfig& config) {
    PipelineState st;
    st.config = config;
    fs::create_directories(config.out_dir);

    InteractionRecorder recorder((fs::path(config.out_dir) / "llm_interactions.json").string(),
                                 (fs::path(config.out_dir) / "llm_interactions.log").string());
    st.files["llm_interactions.json"] = "llm_interactions.json";
    st.files["llm_interactions.log"] = "llm_interactions.log";

    std::unique_ptr<Advisor> advisor;
    if (config.advisor_mode == "remote")
        advisor = std::make_unique<RemoteAdvisor>(config.advisor_url,
                                                  config.advisor_model,
                                                  config.advisor_timeout_s);
    else
        advisor = std::make_unique<DeterministicAdvisor>();

    std::vector<std::pair<std::string, std::string>> stages;  // name -> status
    auto run_stage = [&](const std::string& name, auto&& fn) {
        if (st.failed) {
            stages.emplace_back(name, "skipped");
            return;
        }
        try {
            fn();
            stages.emplace_back(name, "ok");
        } catch (const std::exception& e) {
            st.failed = true;
            st.error_stage = name;
            st.error_message = e.what();
            stages.emplace_back(name, "failed");
            std::cerr << "stage " << name << " failed: " << e.what() << "\n";
        }
    };

    std::vector<WeatherRecord> day_records;

    run_stage("intent", [&] {
        st.intent = analyze_intent(config.query, *advisor, recorder);
        if (config.mitigate) {
            st.intent.mitigation = true;
            st.intent.comfort = st.intent.energy = true;
        }
    });

    run_stage("geometry", [&] {
        GeometryConfig gc;
        st.buildings = build_index(config.geometry_dir, gc);
        write_stl_binary(st.buildings.combined,
                         (fs::path(config.out_dir) / "combined.stl").string());
        write_building_index_json(st.buildings,
                                  (fs::path(config.out_dir) / "building_index.json").string());
        render_index_map(st.buildings,
                         (fs::path(config.out_dir) / "index_map.svg").string());
        st.files["combined.stl"] = "combined.stl";
        st.files["building_index.json"] = "building_index.json";
        st.files["index_map.svg"] = "index_map.svg";
    });

    run_stage("params", [&] {
        ParamSource defaults = config.defaults_path.empty()
                                   ? builtin_defaults()
                                   : load_param_file(config.defaults_path, "defaults file");
        ParamSource user = config.overrides_path.empty()
                               ? ParamSource{}
                               : load_param_file(config.overrides_path, "user overrides");
        user.set("seed", config.seed, "cli");

        // resolve the representative day before touching the weather file
        ResolvedParams pre = merge(defaults, {}, {}, st.intent.suggested, user);
        st.rep_time = parse_day_stamp(pre.get_string("timestamp"),
                                      pre.get_int("representative_hour"));

        EpwFile epw = parse_epw(config.climate_path);
        st.site = epw.site;
        day_records = select_day(epw.records, st.rep_time.month, st.rep_time.day);
        ParamSource climate = climate_source(select_hour(epw.records, st.rep_time),
                                             "epw " + fs::path(config.climate_path)
                                                          .filename().string());
        climate.set("timestamp", pre.get_string("timestamp"), "representative day");

        ParamSource realtime;
        if (config.realtime) {
            WeatherRecord live = fetch_realtime(*config.realtime);
            realtime = climate_source(live, "realtime feed");
        }

        try {
            st.params = merge(defaults, climate, realtime, st.intent.suggested, user);
        } catch (const std::exception& e) {
            std::cerr << "warning: advisor suggestions rejected (" << e.what()
                      << "); merging without them\n";
            st.params = merge(defaults, climate, realtime, {}, user);
        }
        snapshot(st.params,
                 (fs::path(config.out_dir) / "params_snapshot.json").string());
        st.files["params_snapshot.json"] = "params_snapshot.json";
    });

    run_stage("solve", [&] {
        auto forcing = prepare_forcing(day_records, st.site, st.params);
        st.baseline = solve_scenario(st.buildings, st.params, forcing, {},
                                     config.out_dir, "");
        for (const auto& [k, v] : st.baseline.metrics.files) st.files[k] = v;
    });

    if (st.intent.mitigation && config.rounds > 0) {
        run_stage("mitigate", [&] {
            ResolvedParams mit_params = st.params;
            MaterialOverrides overrides;
            std::optional<MaterialPlan> plan;
            if (!config.delta_path.empty()) {
                std::ifstream in(config.delta_path);
                if (!in) throw std::runtime_error("cannot read delta file: " +
                                                  config.delta_path);
                nlohmann::json j;
                in >> j;
                mit_params = apply_delta(mit_params, delta_from_json(j));
            } else {
                plan = propose_materials(st.baseline.metrics, st.buildings,
                                         st.params, advisor.get(), &recorder);
                for (const auto& id : plan->targets) {
                    overrides.roof_albedo[id] = plan->albedo_roof;
                    overrides.wall_albedo[id] = plan->albedo_wall;
                }
                ParamDelta ground;
                ground.level = ProvenanceLevel::Advisor;
                ground.entries.push_back({"albedo_ground",
                                          mit_params.entry("albedo_ground").value,
                                          plan->albedo_ground,
                                          "mitigation: high-reflectance ground cover"});
                mit_params = apply_delta(mit_params, ground);
            }
            st.plan = plan;

            auto forcing = prepare_forcing(day_records, st.site, mit_params);
            st.mitigated = solve_scenario(st.buildings, mit_params, forcing,
                                          overrides, config.out_dir, "mitigated");
            for (const auto& [k, v] : st.mitigated->metrics.files) st.files[k] = v;

            st.deltas = compare_runs(st.baseline.metrics, st.mitigated->metrics,
                                     st.baseline.grids, st.mitigated->grids);
            std::ofstream((fs::path(config.out_dir) / "delta_metrics.json").string())
                << st.deltas->to_json().dump(2) << "\n";
            st.files["delta_metrics.json"] = "delta_metrics.json";
        });
    }

    // report stage always runs, even after a failure
    try {
        std::string report = draft_report(st);
        std::ofstream((fs::path(config.out_dir) / "report.md").string()) << report;
        st.files["report.md"] = "report.md";
        stages.emplace_back("report", "ok");
    } catch (const std::exception& e) {
        stages.emplace_back("report", "failed");
        std::cerr << "report stage failed: " << e.what() << "\n";
    }

    st.advisor_calls = recorder.count();

    nlohmann::ordered_json manifest;
    manifest["schema_version"] = 1;
    auto& js = manifest["stages"] = nlohmann::ordered_json::array();
    for (const auto& [name, status] : stages)
        js.push_back({{"name", name}, {"status", status}});
    manifest["files"] = st.files;
    if (st.failed)
        manifest["error"] = {{"stage", st.error_stage}, {"message", st.error_message}};
    else
        manifest["error"] = nullptr;
    std::ofstream((fs::path(config.out_dir) / "run_manifest.json").string())
        << manifest.dump(2) << "\n";
    st.files["run_manifest.json"] = "run_manifest.json";
    return st;
}

// ---------------------------------------------------------------- report

std::string draft_report(const PipelineState& state) {
    std::ostringstream md;
    md << "# Urban microclimate run report\n\n";

    md << "## Run summary\n\n";
    md << "- Query: " << state.config.query << "\n";
    if (state.rep_time.month > 0)
        md << "- Representative day: " << state.rep_time.str() << "\n";
    if (!state.site.name.empty())
        md << "- Site: " << state.site.name << " ("
           << format_fixed(state.site.latitude, 4) << ", "
           << format_fixed(state.site.longitude, 4) << ")\n";
    md << "- Buildings: " << state.buildings.buildings.size() << "\n";
    md << "- Analyses:";
    if (state.intent.wind) md << " wind";
    if (state.intent.radiation) md << " radiation";
    if (state.intent.comfort) md << " comfort";
    if (state.intent.energy) md << " energy";
    if (state.intent.mitigation) md << " mitigation";
    md << "\n\n";

    if (state.failed) {
        md << "## Diagnostics\n\n";
        md << "The run stopped at stage `" << state.error_stage << "`:\n\n";
        md << "```\n" << state.error_message << "\n```\n\n";
        auto it = state.files.find("params_snapshot.json");
        if (it != state.files.end())
            md << "Partial parameter provenance: `" << it->second << "`\n\n";
    }

    if (!state.params.fields().empty()) {
        md << "## Parameter provenance\n\n";
        md << "| field | value | level | source |\n|---|---|---|---|\n";
        for (const auto& [field, entry] : state.params.fields())
            md << "| " << field << " | " << entry.value.dump() << " | "
               << provenance_name(entry.level) << " | " << entry.source << " |\n";
        md << "\n";
    }

    const auto& metrics = state.baseline.metrics;
    if (!metrics.hotspots.empty()) {
        md << "## Thermal hotspots\n\n";
        md << "Peak PET " << format_fixed(metrics.peak_pet_c, 2) << " degC, peak MRT "
           << format_fixed(metrics.peak_mrt_c, 2) << " degC.\n\n";
        md << "| rank | x (m) | y (m) | hour | PET (degC) | MRT (degC) | nearest | causes |\n";
        md << "|---|---|---|---|---|---|---|---|\n";
        int rank = 1;
        for (const auto& h : metrics.hotspots) {
            md << "| " << rank++ << " | " << format_fixed(h.x, 1) << " | "
               << format_fixed(h.y, 1) << " | " << h.hour << " | "
               << format_fixed(h.pet_c, 2) << " | " << format_fixed(h.mrt_c, 2) << " | ";
            for (size_t i = 0; i < h.nearest_buildings.size(); ++i)
                md << (i ? ", " : "") << h.nearest_buildings[i];
            md << " | ";
            for (size_t i = 0; i < h.causes.size(); ++i)
                md << (i ? ", " : "") << h.causes[i];
            md << " |\n";
        }
        md << "\n";
    }

    if (!metrics.building_energies.empty()) {
        md << "## Building cooling loads\n\n";
        md << "| building | daily cooling (kWh) | envelope (m2) | EUI (kWh/m2) | outlier |\n";
        md << "|---|---|---|---|---|\n";
        for (const auto& b : metrics.building_energies)
            md << "| " << b.id << " | " << format_fixed(b.daily_energy_kwh, 1) << " | "
               << format_fixed(b.envelope_area_m2, 1) << " | "
               << format_fixed(b.eui_kwh_m2, 3) << " | " << (b.outlier ? "yes" : "no")
               << " |\n";
        md << "\n";
    }

    if (state.deltas) {
        const auto& d = *state.deltas;
        md << "## Mitigation outcome\n\n";
        if (state.plan) {
            md << "Targets:";
            for (const auto& t : state.plan->targets) md << " " << t;
            md << " (roof albedo " << format_fixed(state.plan->albedo_roof, 2)
               << ", wall " << format_fixed(state.plan->albedo_wall, 2) << ", ground "
               << format_fixed(state.plan->albedo_ground, 2)
               << "; emissivity held fixed).\n\n";
        }
        md << "| building | before (kWh) | after (kWh) | reduction (%) |\n";
        md << "|---|---|---|---|\n";
        for (const auto& b : d.buildings)
            md << "| " << b.id << " | " << format_fixed(b.before_kwh, 1) << " | "
               << format_fixed(b.after_kwh, 1) << " | "
               << format_fixed(b.reduction_pct, 1) << " |\n";
        md << "| total | " << format_fixed(d.total_before_kwh, 1) << " | "
           << format_fixed(d.total_after_kwh, 1) << " | "
           << format_fixed(d.total_reduction_pct, 1) << " |\n\n";

        if (!d.hotspots.empty()) {
            md << "| hotspot (x, y, hour) | PET before | PET after | delta |\n";
            md << "|---|---|---|---|\n";
            for (const auto& h : d.hotspots)
                md << "| (" << format_fixed(h.x, 1) << ", " << format_fixed(h.y, 1)
                   << ", " << h.hour << ") | " << format_fixed(h.pet_before_c, 2)
                   << " | " << format_fixed(h.pet_after_c, 2) << " | "
                   << format_fixed(h.delta_pet_c, 2) << " |\n";
            md << "\n";
        }
        if (d.albedo_penalty)
            md << "**Albedo penalty detected**: the brighter ground and wall surfaces "
                  "cut building heat gain, but the extra reflected shortwave raised "
                  "pedestrian PET at sun-exposed hotspots. Prefer roof-first "
                  "strategies where street-level comfort is the constraint.\n\n";
        else
            md << "No albedo penalty: pedestrian comfort at the baseline hotspots "
                  "did not degrade.\n\n";
    }

    md << "## Recommendations\n\n";
    bool low_wind = false, high_svf = false, reflected = false;
    for (const auto& h : metrics.hotspots)
        for (const auto& c : h.causes) {
            if (c == "low wind") low_wind = true;
            if (c == "high svf") high_svf = true;
            if (c == "reflected gain") reflected = true;
        }
    md << "- Materials: raise roof albedo first; it lowers cooling loads without "
          "adding street-level radiant load.\n";
    if (reflected || (state.deltas && state.deltas->albedo_penalty))
        md << "- Materials: avoid high-albedo ground finishes next to the ranked "
              "hotspots; reflected shortwave is already a driver there.\n";
    if (high_svf)
        md << "- Shading: hotspots with high sky exposure respond best to canopies "
              "or street trees.\n";
    if (low_wind)
        md << "- Ventilation: low local wind contributes to the ranked hotspots; "
              "keep street axes aligned with the prevailing wind open.\n";
    md << "\n";

    md << "## Reference output files\n\n";
    for (const auto& [name, path] : state.files)
        md << "- `" << path << "`\n";
    md << "\n";
    return md.str();
}

} // namespace umc
