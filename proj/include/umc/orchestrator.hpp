#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "umc/comfort.hpp"
#include "umc/geometry.hpp"
#include "umc/outputs.hpp"
#include "umc/params.hpp"
#include "umc/simulation.hpp"
#include "umc/weather.hpp"

namespace umc {

struct InteractionRecord {
    std::string stage;
    std::string prompt;
    std::string response;
    double latency_ms = 0.0;
    std::string timestamp;  // wall clock, ISO-8601
};

// Append-only advisor interaction log: one structured JSON file plus a
// human-readable verbose log, both flushed before record() returns.
class InteractionRecorder {
public:
    InteractionRecorder(std::string json_path, std::string log_path);

    void record(const std::string& stage, const std::string& prompt,
                const std::string& response, double latency_ms);
    size_t count() const { return records_.size(); }
    const std::vector<InteractionRecord>& records() const { return records_; }

private:
    std::string json_path_, log_path_;
    std::vector<InteractionRecord> records_;
    void rewrite_json() const;
};

// Pluggable planning backend. Requests and responses are strict JSON; free
// text is allowed only inside "rationale".
class Advisor {
public:
    virtual ~Advisor() = default;
    virtual std::string name() const = 0;
    virtual nlohmann::json ask(const std::string& stage,
                               const nlohmann::json& request) = 0;
};

// Keyword-rule planner; fully reproducible, used by default and as fallback.
class DeterministicAdvisor : public Advisor {
public:
    std::string name() const override { return "deterministic"; }
    nlohmann::json ask(const std::string& stage,
                       const nlohmann::json& request) override;
};

// Chat-completion-style HTTP client; API key from UMC_ADVISOR_KEY.
class RemoteAdvisor : public Advisor {
public:
    RemoteAdvisor(std::string url, std::string model, double timeout_s);
    std::string name() const override { return "remote"; }
    nlohmann::json ask(const std::string& stage,
                       const nlohmann::json& request) override;

private:
    std::string url_, model_;
    double timeout_s_;
};

struct IntentPlan {
    bool wind = false, radiation = false, comfort = false, energy = false,
         mitigation = false;
    ParamSource suggested;  // partial, applied at advisor level
    std::string rationale;
};

// Asks the advisor for a plan; schema violations retry once, then fall back
// to the deterministic rules. Throws if no analysis is derivable at all.
IntentPlan analyze_intent(const std::string& query, Advisor& advisor,
                          InteractionRecorder& recorder);

struct MaterialPlan {
    std::vector<std::string> targets;
    double albedo_roof = 0.65, albedo_wall = 0.60, albedo_ground = 0.40;
    std::map<std::string, std::string> rationale;  // per target
};

MaterialPlan propose_materials(const RunMetrics& baseline, const BuildingSet& set,
                               const ResolvedParams& params, Advisor* advisor,
                               InteractionRecorder* recorder);

struct BuildingDelta {
    std::string id;
    double before_kwh = 0.0, after_kwh = 0.0, reduction_pct = 0.0;
};

struct HotspotDelta {
    double x = 0.0, y = 0.0;
    int hour = 0;
    double pet_before_c = 0.0, pet_after_c = 0.0, delta_pet_c = 0.0;
    bool sun_exposed = false;
};

struct DeltaMetrics {
    std::vector<BuildingDelta> buildings;
    std::vector<HotspotDelta> hotspots;
    double total_before_kwh = 0.0, total_after_kwh = 0.0;
    double total_reduction_pct = 0.0;
    double peak_power_before_w = 0.0, peak_power_after_w = 0.0;
    bool albedo_penalty = false;

    nlohmann::ordered_json to_json() const;
};

// Per-building and per-hotspot deltas; samples the mitigated PET grids at the
// baseline hotspot coordinates. The penalty flag fires when mean PET at
// sun-exposed hotspots rose by more than 0.1 degC while total cooling fell.
DeltaMetrics compare_runs(const RunMetrics& baseline, const RunMetrics& mitigated,
                          const std::vector<ComfortGrid>& baseline_grids,
                          const std::vector<ComfortGrid>& mitigated_grids);

struct RunConfig {
    std::string geometry_dir;
    std::string climate_path;
    std::string query;
    std::string out_dir;
    std::string defaults_path;   // optional, builtin when empty
    std::string overrides_path;  // optional user-level params
    std::string delta_path;      // optional explicit mitigation delta
    int seed = 42;
    int rounds = 1;  // mitigation rounds (0 = baseline only)
    bool mitigate = false;
    std::string advisor_mode = "deterministic";
    std::string advisor_url, advisor_model;
    double advisor_timeout_s = 30.0;
    std::optional<RealtimeConfig> realtime;
};

struct SolveArtifacts {
    RunMetrics metrics;
    std::vector<ComfortGrid> grids;
};

struct PipelineState {
    RunConfig config;
    IntentPlan intent;
    BuildingSet buildings;
    ResolvedParams params;
    Timestamp rep_time;  // representative day + hour
    SiteLocation site;
    SolveArtifacts baseline;
    std::optional<SolveArtifacts> mitigated;
    std::optional<MaterialPlan> plan;
    std::optional<DeltaMetrics> deltas;
    std::map<std::string, std::string> files;  // logical name -> relative path
    size_t advisor_calls = 0;

    bool failed = false;
    std::string error_stage, error_message;
};

// One complete solver pass: wind volume, surface energy balance, pedestrian
// comfort, building loads, hotspots. Writes field artifacts when out_dir is
// non-empty; relative artifact paths accumulate into metrics.files.
SolveArtifacts solve_scenario(const BuildingSet& set, const ResolvedParams& params,
                              const std::vector<HourForcing>& day,
                              const MaterialOverrides& overrides,
                              const std::string& out_dir,
                              const std::string& prefix = "");

// Five stages in fixed order: intent, geometry, params, solve, optional
// mitigation, report. Failures short-circuit into a diagnostics report.
PipelineState run_pipeline(const RunConfig& config);

// Report synthesis; every number is formatted exactly as in the metrics JSON
// companions (PET 0.01 degC, energy 0.1 kWh, percentages 0.1).
std::string draft_report(const PipelineState& state);

std::string format_fixed(double v, int decimals);

} // namespace umc
