#include "umc/params.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>

namespace umc {

const char* provenance_name(ProvenanceLevel level) {
    switch (level) {
        case ProvenanceLevel::Default: return "default";
        case ProvenanceLevel::Climate: return "climate";
        case ProvenanceLevel::Realtime: return "realtime";
        case ProvenanceLevel::Advisor: return "advisor";
        case ProvenanceLevel::User: return "user";
    }
    return "default";
}

ProvenanceLevel provenance_from_name(const std::string& name) {
    if (name == "default") return ProvenanceLevel::Default;
    if (name == "climate") return ProvenanceLevel::Climate;
    if (name == "realtime") return ProvenanceLevel::Realtime;
    if (name == "advisor") return ProvenanceLevel::Advisor;
    if (name == "user") return ProvenanceLevel::User;
    throw std::runtime_error("unknown provenance level: " + name);
}

void ParamSource::set(const std::string& field, nlohmann::json value, std::string note) {
    values[field] = ParamEntry{std::move(value), ProvenanceLevel::Default, std::move(note)};
}

double ResolvedParams::get_double(const std::string& field) const {
    return entry(field).value.get<double>();
}

int ResolvedParams::get_int(const std::string& field) const {
    return entry(field).value.get<int>();
}

std::string ResolvedParams::get_string(const std::string& field) const {
    return entry(field).value.get<std::string>();
}

std::vector<double> ResolvedParams::get_doubles(const std::string& field) const {
    return entry(field).value.get<std::vector<double>>();
}

const ParamEntry& ResolvedParams::entry(const std::string& field) const {
    auto it = fields_.find(field);
    if (it == fields_.end())
        throw std::runtime_error("unknown parameter field: " + field);
    return it->second;
}

void ResolvedParams::set(const std::string& field, nlohmann::json value,
                         ProvenanceLevel level, std::string note) {
    fields_[field] = ParamEntry{std::move(value), level, std::move(note)};
}

bool ResolvedParams::operator==(const ResolvedParams& o) const {
    if (fields_.size() != o.fields_.size()) return false;
    for (const auto& [k, e] : fields_) {
        auto it = o.fields_.find(k);
        if (it == o.fields_.end()) return false;
        if (e.value != it->second.value || e.level != it->second.level ||
            e.source != it->second.source)
            return false;
    }
    return true;
}

ParamDelta ParamDelta::reversed() const {
    ParamDelta r;
    r.level = level;
    for (const auto& e : entries)
        r.entries.push_back({e.field, e.new_value, e.old_value, "reverse: " + e.reason});
    return r;
}

ParamSource builtin_defaults() {
    ParamSource d;
    const char* note = "builtin default";
    auto set = [&](const char* k, nlohmann::json v) { d.set(k, std::move(v), note); };

    // simulation timestamp (representative day, local civil time)
    set("timestamp", "04-20");
    set("representative_hour", 13);

    // weather fields (overridable per the chain; hourly series comes from the
    // climate file unless a higher level wins)
    set("t_air_c", 30.0);
    set("rh_pct", 70.0);
    set("wind_speed_10m_ms", 2.0);
    set("wind_dir_deg", 90.0);
    set("ghi_wm2", 600.0);
    set("dni_wm2", 300.0);
    set("dhi_wm2", 350.0);

    // grid + time stepping
    set("cell_size_m", 2.0);
    set("pedestrian_cell_size_m", 2.0);
    set("dt_s", 600.0);
    set("slice_heights_m", std::vector<double>{2, 10, 20, 30, 40, 50, 100});
    set("ground_buffer_factor", 1.2);

    // wind solver
    set("z0_m", 0.5);
    set("sor_relaxation", 1.8);
    set("sor_tolerance", 1e-6);
    set("sor_max_iters", 200000);
    set("k_mix_k_per_ms", 0.3);
    set("delta_t_max_k", 2.0);

    // materials {roof, wall, ground}
    set("albedo_roof", 0.20);
    set("albedo_wall", 0.30);
    set("albedo_ground", 0.15);
    set("emissivity_roof", 0.90);
    set("emissivity_wall", 0.90);
    set("emissivity_ground", 0.90);
    set("heat_capacity_j_m3k", 0.5e6);
    set("effective_thickness_m", 0.1);
    set("wall_u_wm2k", 2.5);
    set("indoor_setpoint_c", 25.0);
    set("ctf_weights", std::vector<double>{1.0});

    // radiation
    set("h_conv_a", 5.7);
    set("h_conv_b", 3.8);
    set("sky_emissivity", 0.85);
    set("svf_samples", 64);
    set("seed", 42);

    // person (conventional PET reference person)
    set("person_age", 35);
    set("person_height_m", 1.75);
    set("person_weight_kg", 75.0);
    set("person_sex", "male");
    set("person_work_w", 80.0);
    set("person_clo", 0.9);
    set("alpha_sw", 0.7);
    set("alpha_lw", 0.97);
    set("f_projected", 0.7);

    // analysis thresholds
    set("eui_outlier_sigma", 1.5);
    set("hotspot_wind_threshold_ms", 1.0);
    set("hotspot_svf_threshold", 0.7);
    set("hotspot_reflected_threshold_wm2", 100.0);

    // mitigation heuristics
    set("mitigation_top_n", 8);
    set("mitigation_radius_m", 50.0);
    set("mitigation_albedo_roof", 0.65);
    set("mitigation_albedo_wall", 0.60);
    set("mitigation_albedo_ground", 0.40);
    return d;
}

namespace {

// nlohmann keeps the last duplicate silently; detect duplicates with a
// parser callback instead.
void check_duplicate_keys(const std::string& text, const std::string& path) {
    std::vector<std::set<std::string>> stack;
    nlohmann::json::parser_callback_t cb =
        [&](int /*depth*/, nlohmann::json::parse_event_t event,
            nlohmann::json& parsed) -> bool {
        if (event == nlohmann::json::parse_event_t::object_start) {
            stack.emplace_back();
        } else if (event == nlohmann::json::parse_event_t::object_end) {
            stack.pop_back();
        } else if (event == nlohmann::json::parse_event_t::key) {
            std::string key = parsed.get<std::string>();
            if (!stack.empty() && !stack.back().insert(key).second)
                throw std::runtime_error(path + ": duplicate key '" + key +
                                         "' within one parameter source");
        }
        return true;
    };
    auto parsed = nlohmann::json::parse(text, cb);
    (void)parsed;
}

struct Validator {
    std::string field;
    std::function<std::optional<std::string>(const nlohmann::json&)> check;
};

std::optional<std::string> range01(const nlohmann::json& v) {
    if (!v.is_number()) return "must be numeric";
    double d = v.get<double>();
    if (d < 0.0 || d > 1.0) return "out of [0,1]";
    return std::nullopt;
}

std::optional<std::string> positive(const nlohmann::json& v) {
    if (!v.is_number()) return "must be numeric";
    if (v.get<double>() <= 0.0) return "must be > 0";
    return std::nullopt;
}

std::optional<std::string> non_negative(const nlohmann::json& v) {
    if (!v.is_number()) return "must be numeric";
    if (v.get<double>() < 0.0) return "must be >= 0";
    return std::nullopt;
}

const std::vector<Validator>& validators() {
    static const std::vector<Validator> v = {
        {"albedo_roof", range01},
        {"albedo_wall", range01},
        {"albedo_ground", range01},
        {"mitigation_albedo_roof", range01},
        {"mitigation_albedo_wall", range01},
        {"mitigation_albedo_ground", range01},
        {"alpha_sw", range01},
        {"alpha_lw", range01},
        {"f_projected", range01},
        {"sky_emissivity", range01},
        {"emissivity_roof",
         [](const nlohmann::json& x) -> std::optional<std::string> {
             double d = x.get<double>();
             if (d <= 0.0 || d > 1.0) return "out of (0,1]";
             return std::nullopt;
         }},
        {"emissivity_wall",
         [](const nlohmann::json& x) -> std::optional<std::string> {
             double d = x.get<double>();
             if (d <= 0.0 || d > 1.0) return "out of (0,1]";
             return std::nullopt;
         }},
        {"emissivity_ground",
         [](const nlohmann::json& x) -> std::optional<std::string> {
             double d = x.get<double>();
             if (d <= 0.0 || d > 1.0) return "out of (0,1]";
             return std::nullopt;
         }},
        {"rh_pct",
         [](const nlohmann::json& x) -> std::optional<std::string> {
             double d = x.get<double>();
             if (d < 0.0 || d > 100.0) return "out of [0,100]";
             return std::nullopt;
         }},
        {"wind_dir_deg",
         [](const nlohmann::json& x) -> std::optional<std::string> {
             double d = x.get<double>();
             if (d < 0.0 || d >= 360.0) return "out of [0,360)";
             return std::nullopt;
         }},
        {"wind_speed_10m_ms", non_negative},
        {"ghi_wm2", non_negative},
        {"dni_wm2", non_negative},
        {"dhi_wm2", non_negative},
        {"z0_m",
         [](const nlohmann::json& x) -> std::optional<std::string> {
             double d = x.get<double>();
             if (d <= 0.0) return "must be > 0";
             if (d >= 10.0) return "must be < 10 m (log profile reference height)";
             return std::nullopt;
         }},
        {"dt_s", positive},
        {"cell_size_m", positive},
        {"pedestrian_cell_size_m", positive},
        {"heat_capacity_j_m3k", positive},
        {"effective_thickness_m", positive},
        {"wall_u_wm2k", positive},
        {"person_height_m", positive},
        {"person_weight_kg", positive},
        {"person_work_w", positive},
        {"person_clo", positive},
        {"ground_buffer_factor",
         [](const nlohmann::json& x) -> std::optional<std::string> {
             if (x.get<double>() < 1.0) return "must be >= 1";
             return std::nullopt;
         }},
        {"slice_heights_m",
         [](const nlohmann::json& x) -> std::optional<std::string> {
             if (!x.is_array() || x.empty()) return "must be a non-empty array";
             double prev = 0.0;
             for (const auto& e : x) {
                 double d = e.get<double>();
                 if (d <= prev) return "not strictly increasing";
                 prev = d;
             }
             return std::nullopt;
         }},
        {"ctf_weights",
         [](const nlohmann::json& x) -> std::optional<std::string> {
             if (!x.is_array() || x.empty()) return "must be a non-empty array";
             double sum = 0.0;
             for (const auto& e : x) sum += e.get<double>();
             if (std::abs(sum - 1.0) > 1e-9) return "weights must sum to 1";
             return std::nullopt;
         }},
    };
    return v;
}

std::optional<std::string> check_field(const std::string& field,
                                       const nlohmann::json& value) {
    for (const auto& v : validators())
        if (v.field == field) return v.check(value);
    return std::nullopt;
}

} // namespace

ParamSource load_param_file(const std::string& path, std::string note) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open parameter file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    check_duplicate_keys(text, path);
    nlohmann::json j = nlohmann::json::parse(text);
    if (!j.is_object())
        throw std::runtime_error(path + ": parameter file must be a JSON object");
    ParamSource src;
    for (auto it = j.begin(); it != j.end(); ++it) src.set(it.key(), it.value(), note);
    return src;
}

ResolvedParams merge(const ParamSource& defaults, const ParamSource& climate,
                     const ParamSource& realtime, const ParamSource& advisor,
                     const ParamSource& user) {
    const ParamSource schema = builtin_defaults();
    for (const auto& [field, _] : schema.values)
        if (!defaults.has(field))
            throw std::runtime_error("defaults incomplete: missing field '" + field + "'");

    ResolvedParams out;
    for (const auto& [field, entry] : defaults.values)
        out.set(field, entry.value, ProvenanceLevel::Default,
                entry.source.empty() ? "default" : entry.source);

    auto apply = [&](const ParamSource& src, ProvenanceLevel level) {
        for (const auto& [field, entry] : src.values) {
            if (!out.has(field))
                throw std::runtime_error(std::string(provenance_name(level)) +
                                         " source sets unknown field '" + field + "'");
            out.set(field, entry.value, level, entry.source);
        }
    };
    apply(climate, ProvenanceLevel::Climate);
    apply(realtime, ProvenanceLevel::Realtime);
    // advisor fills only fields that climate AND realtime left unset
    for (const auto& [field, entry] : advisor.values) {
        if (climate.has(field) || realtime.has(field)) continue;
        if (!out.has(field))
            throw std::runtime_error("advisor source sets unknown field '" + field + "'");
        out.set(field, entry.value, ProvenanceLevel::Advisor, entry.source);
    }
    apply(user, ProvenanceLevel::User);

    for (const auto& [field, entry] : out.fields()) {
        auto err = check_field(field, entry.value);
        if (err)
            throw std::runtime_error("parameter '" + field + "' = " +
                                     entry.value.dump() + " from " +
                                     provenance_name(entry.level) + ": " + *err);
    }
    return out;
}

std::vector<std::string> validate(const ResolvedParams& params) {
    std::vector<std::string> violations;
    for (const auto& [field, entry] : params.fields()) {
        auto err = check_field(field, entry.value);
        if (err) violations.push_back(field + ": " + *err);
    }
    return violations;
}

void snapshot(const ResolvedParams& params, const std::string& path) {
    nlohmann::ordered_json j;
    for (const auto& [field, entry] : params.fields()) {
        nlohmann::ordered_json e;
        e["value"] = entry.value;
        e["level"] = provenance_name(entry.level);
        e["source"] = entry.source;
        j[field] = e;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write snapshot: " + path);
    out << j.dump(2) << "\n";
}

ResolvedParams load_snapshot(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open snapshot: " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    ResolvedParams out;
    for (auto it = j.begin(); it != j.end(); ++it)
        out.set(it.key(), it.value()["value"],
                provenance_from_name(it.value()["level"].get<std::string>()),
                it.value()["source"].get<std::string>());
    return out;
}

ResolvedParams apply_delta(const ResolvedParams& base, const ParamDelta& delta) {
    ResolvedParams out = base;
    for (const auto& e : delta.entries) {
        if (!out.has(e.field))
            throw std::runtime_error("delta on unknown field '" + e.field + "'");
        auto err = check_field(e.field, e.new_value);
        if (err)
            throw std::runtime_error("delta value for '" + e.field + "' invalid: " + *err);
        out.set(e.field, e.new_value, delta.level, e.reason);
    }
    return out;
}

ParamDelta delta_from_json(const nlohmann::json& j) {
    ParamDelta d;
    if (j.contains("level")) d.level = provenance_from_name(j["level"].get<std::string>());
    for (const auto& e : j.at("entries"))
        d.entries.push_back({e.at("field").get<std::string>(),
                             e.value("old_value", nlohmann::json()),
                             e.at("new_value"), e.value("reason", std::string())});
    return d;
}

nlohmann::json delta_to_json(const ParamDelta& d) {
    nlohmann::ordered_json j;
    j["level"] = provenance_name(d.level);
    auto arr = nlohmann::ordered_json::array();
    for (const auto& e : d.entries) {
        nlohmann::ordered_json x;
        x["field"] = e.field;
        x["old_value"] = e.old_value;
        x["new_value"] = e.new_value;
        x["reason"] = e.reason;
        arr.push_back(x);
    }
    j["entries"] = arr;
    return j;
}

} // namespace umc
