#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "umc/orchestrator.hpp"

namespace fs = std::filesystem;

namespace {

std::string default_out_dir() {
    auto t = std::time(nullptr);
    std::tm tm{};
    localtime_r(&t, &tm);
    char buf[64];
    std::strftime(buf, sizeof(buf), "runs/run_%Y%m%d_%H%M%S", &tm);
    return buf;
}

std::string read_all(std::istream& in) {
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string resolve_query(const std::string& flag, const std::string& file) {
    if (!flag.empty()) return flag;
    if (!file.empty()) {
        std::ifstream in(file);
        if (!in) throw std::runtime_error("cannot read query file: " + file);
        return read_all(in);
    }
    std::cerr << "reading query from stdin...\n";
    return read_all(std::cin);
}

struct CommonArgs {
    std::string geometry, climate, query, query_file, out;
    std::string defaults_path, overrides_path, delta_path;
    std::string advisor = "deterministic";
    std::string advisor_url, advisor_model = "default";
    double advisor_timeout = 30.0;
    int seed = 42;
    int rounds = 1;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("--geometry", a.geometry, "directory of .stl building files")
        ->required()
        ->check(CLI::ExistingDirectory);
    cmd->add_option("--climate", a.climate, "EPW weather file")->required();
    cmd->add_option("--query", a.query, "natural-language task");
    cmd->add_option("--query-file", a.query_file, "file holding the task text");
    cmd->add_option("--out", a.out, "output directory (default: runs/run_<stamp>)");
    cmd->add_option("--defaults", a.defaults_path, "defaults JSON (builtin if omitted)");
    cmd->add_option("--params", a.overrides_path, "user-level parameter overrides JSON");
    cmd->add_option("--seed", a.seed, "random seed");
    cmd->add_option("--advisor", a.advisor, "planning backend")
        ->check(CLI::IsMember({"deterministic", "remote"}));
    cmd->add_option("--advisor-url", a.advisor_url, "remote advisor endpoint");
    cmd->add_option("--advisor-model", a.advisor_model, "remote advisor model id");
    cmd->add_option("--advisor-timeout", a.advisor_timeout, "advisor timeout seconds");
}

int execute(const CommonArgs& a, bool mitigate) {
    umc::RunConfig cfg;
    cfg.geometry_dir = a.geometry;
    cfg.climate_path = a.climate;
    cfg.query = resolve_query(a.query, a.query_file);
    cfg.out_dir = a.out.empty() ? default_out_dir() : a.out;
    cfg.defaults_path = a.defaults_path;
    cfg.overrides_path = a.overrides_path;
    cfg.delta_path = a.delta_path;
    cfg.seed = a.seed;
    cfg.rounds = a.rounds;
    cfg.mitigate = mitigate;
    cfg.advisor_mode = a.advisor;
    cfg.advisor_url = a.advisor_url;
    cfg.advisor_model = a.advisor_model;
    cfg.advisor_timeout_s = a.advisor_timeout;
    if (cfg.advisor_mode == "remote" && cfg.advisor_url.empty()) {
        std::cerr << "error: --advisor remote requires --advisor-url\n";
        return 2;
    }

    umc::PipelineState state = umc::run_pipeline(cfg);
    std::cout << "output directory: " << cfg.out_dir << "\n";
    if (state.failed) {
        std::cerr << "pipeline failed at stage " << state.error_stage << ": "
                  << state.error_message << "\n";
        return 1;
    }
    std::cout << "peak PET " << umc::format_fixed(state.baseline.metrics.peak_pet_c, 2)
              << " degC over " << state.baseline.metrics.hours.size() << " hours\n";
    if (state.deltas)
        std::cout << "total cooling reduction "
                  << umc::format_fixed(state.deltas->total_reduction_pct, 1) << " %"
                  << (state.deltas->albedo_penalty ? " (albedo penalty!)" : "") << "\n";
    return 0;
}

int inspect_geometry(const std::string& dir) {
    umc::GeometryConfig gc;
    auto set = umc::build_index(dir, gc);
    std::printf("%-24s %10s %12s %12s %12s\n", "id", "height_m", "footprint_m2",
                "volume_m3", "envelope_m2");
    for (const auto& b : set.buildings)
        std::printf("%-24s %10.2f %12.2f %12.2f %12.2f\n", b.id.c_str(), b.height_m,
                    b.footprint_area_m2, b.volume_m3, b.envelope_area_m2);
    return 0;
}

int inspect_epw(const std::string& path) {
    auto epw = umc::parse_epw(path);
    std::printf("site: %s (lat %.4f, lon %.4f, utc %+.1f, alt %.1f m)\n",
                epw.site.name.c_str(), epw.site.latitude, epw.site.longitude,
                epw.site.utc_offset, epw.site.altitude);
    std::printf("records: %zu\n", epw.records.size());
    size_t t = 0, rh = 0, ws = 0, sol = 0;
    for (const auto& r : epw.records) {
        t += r.t_air_2m.has_value();
        rh += r.rh_2m.has_value();
        ws += r.wind_speed_10m.has_value();
        sol += r.ghi.has_value() || (r.dni.has_value() && r.dhi.has_value());
    }
    std::printf("coverage: t_air %zu, rh %zu, wind %zu, solar %zu\n", t, rh, ws, sol);
    return 0;
}

int inspect_snapshot(const std::string& path) {
    auto params = umc::load_snapshot(path);
    std::printf("%-32s %-10s %s\n", "field", "level", "value");
    for (const auto& [field, entry] : params.fields())
        std::printf("%-32s %-10s %s\n", field.c_str(),
                    umc::provenance_name(entry.level), entry.value.dump().c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"urban microclimate pipeline"};
    app.require_subcommand(1);

    CommonArgs run_args, mit_args;
    auto* run = app.add_subcommand("run", "coupled wind/solar/comfort/energy audit");
    add_common(run, run_args);

    auto* mitigate = app.add_subcommand(
        "mitigate", "baseline, then a material-intervention round with deltas");
    add_common(mitigate, mit_args);
    mitigate->add_option("--rounds", mit_args.rounds,
                         "mitigation rounds (0 = baseline only)");
    mitigate->add_option("--delta", mit_args.delta_path,
                         "parameter delta JSON, bypasses the proposal heuristic");

    std::string ins_geometry, ins_epw, ins_snapshot;
    auto* inspect = app.add_subcommand("inspect", "print input/run summaries");
    inspect->add_option("--geometry", ins_geometry, "geometry directory");
    inspect->add_option("--epw", ins_epw, "EPW file");
    inspect->add_option("--snapshot", ins_snapshot, "params snapshot JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) return execute(run_args, false);
        if (mitigate->parsed()) return execute(mit_args, true);
        if (inspect->parsed()) {
            if (!ins_geometry.empty()) return inspect_geometry(ins_geometry);
            if (!ins_epw.empty()) return inspect_epw(ins_epw);
            if (!ins_snapshot.empty()) return inspect_snapshot(ins_snapshot);
            std::cerr << "inspect needs one of --geometry, --epw, --snapshot\n";
            return 2;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
