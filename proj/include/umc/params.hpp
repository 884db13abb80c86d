#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace umc {

enum class ProvenanceLevel { Default = 1, Climate = 2, Realtime = 3, Advisor = 4, User = 5 };

const char* provenance_name(ProvenanceLevel level);
ProvenanceLevel provenance_from_name(const std::string& name);

struct ParamEntry {
    nlohmann::json value;
    ProvenanceLevel level = ProvenanceLevel::Default;
    std::string source;  // free-text note, e.g. file name or advisor rationale
};

// A partial contribution from one source of the priority chain.
struct ParamSource {
    std::map<std::string, ParamEntry> values;

    void set(const std::string& field, nlohmann::json value, std::string note = "");
    bool has(const std::string& field) const { return values.count(field) > 0; }
};

class ResolvedParams {
public:
    ResolvedParams() = default;

    double get_double(const std::string& field) const;
    int get_int(const std::string& field) const;
    std::string get_string(const std::string& field) const;
    std::vector<double> get_doubles(const std::string& field) const;
    const ParamEntry& entry(const std::string& field) const;
    bool has(const std::string& field) const { return fields_.count(field) > 0; }

    const std::map<std::string, ParamEntry>& fields() const { return fields_; }
    void set(const std::string& field, nlohmann::json value, ProvenanceLevel level,
             std::string note);

    bool operator==(const ResolvedParams& o) const;

private:
    std::map<std::string, ParamEntry> fields_;
};

struct DeltaEntry {
    std::string field;
    nlohmann::json old_value;
    nlohmann::json new_value;
    std::string reason;
};

struct ParamDelta {
    std::vector<DeltaEntry> entries;
    ProvenanceLevel level = ProvenanceLevel::Advisor;

    ParamDelta reversed() const;
};

// Canonical default parameter set; defines the complete field schema.
ParamSource builtin_defaults();

// Loads a {field: value} JSON file into a ParamSource. Duplicate keys inside
// one source are a hard error.
ParamSource load_param_file(const std::string& path, std::string note);

// Five-level merge per the priority chain. Advisor values apply only where
// climate and realtime both left the field unset; user overrides everything.
// Throws if defaults are incomplete or a winning value fails validation.
ResolvedParams merge(const ParamSource& defaults, const ParamSource& climate,
                     const ParamSource& realtime, const ParamSource& advisor,
                     const ParamSource& user);

// Range checks; returns human-readable violations (empty = ok).
std::vector<std::string> validate(const ResolvedParams& params);

// Stable-ordered snapshot JSON: {field: {value, level, source}}.
void snapshot(const ResolvedParams& params, const std::string& path);
ResolvedParams load_snapshot(const std::string& path);

ResolvedParams apply_delta(const ResolvedParams& base, const ParamDelta& delta);

ParamDelta delta_from_json(const nlohmann::json& j);
nlohmann::json delta_to_json(const ParamDelta& delta);

} // namespace umc
