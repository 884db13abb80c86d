#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "support.hpp"
#include "umc/params.hpp"

using namespace umc;

TEST_CASE("priority chain: climate beats default, advisor suppressed") {
    ParamSource climate, advisor;
    climate.set("wind_speed_10m_ms", 3.1, "iwec");
    advisor.set("wind_speed_10m_ms", 4.5, "llm suggestion");

    auto merged = merge(builtin_defaults(), climate, {}, advisor, {});
    CHECK(merged.get_double("wind_speed_10m_ms") == doctest::Approx(3.1));
    CHECK(merged.entry("wind_speed_10m_ms").level == ProvenanceLevel::Climate);
}

TEST_CASE("defaults alone resolve at default level") {
    auto merged = merge(builtin_defaults(), {}, {}, {}, {});
    CHECK(merged.get_double("wind_speed_10m_ms") == doctest::Approx(2.0));
    CHECK(merged.entry("wind_speed_10m_ms").level == ProvenanceLevel::Default);
}

TEST_CASE("user overrides everything") {
    ParamSource climate, user;
    climate.set("wind_speed_10m_ms", 3.1, "iwec");
    user.set("wind_speed_10m_ms", 6.2, "cli flag");
    auto merged = merge(builtin_defaults(), climate, {}, {}, user);
    CHECK(merged.get_double("wind_speed_10m_ms") == doctest::Approx(6.2));
    CHECK(merged.entry("wind_speed_10m_ms").level == ProvenanceLevel::User);
}

TEST_CASE("exhaustive 2^5 presence enumeration honours the chain") {
    const std::string field = "wind_speed_10m_ms";
    for (int pattern = 0; pattern < 32; ++pattern) {
        bool has_default = pattern & 1;  // defaults must always be complete;
                                         // pattern bit toggles a *distinct* value
        bool has_climate = pattern & 2;
        bool has_realtime = pattern & 4;
        bool has_advisor = pattern & 8;
        bool has_user = pattern & 16;

        ParamSource defaults = builtin_defaults();
        defaults.set(field, has_default ? 1.0 : 2.0, "default");
        ParamSource climate, realtime, advisor, user;
        if (has_climate) climate.set(field, 3.0, "climate");
        if (has_realtime) realtime.set(field, 4.0, "realtime");
        if (has_advisor) advisor.set(field, 5.0, "advisor");
        if (has_user) user.set(field, 6.0, "user");

        auto merged = merge(defaults, climate, realtime, advisor, user);
        double expect;
        ProvenanceLevel level;
        if (has_user) {
            expect = 6.0; level = ProvenanceLevel::User;
        } else if (has_advisor && !has_climate && !has_realtime) {
            expect = 5.0; level = ProvenanceLevel::Advisor;
        } else if (has_realtime) {
            expect = 4.0; level = ProvenanceLevel::Realtime;
        } else if (has_climate) {
            expect = 3.0; level = ProvenanceLevel::Climate;
        } else {
            expect = has_default ? 1.0 : 2.0; level = ProvenanceLevel::Default;
        }
        CAPTURE(pattern);
        CHECK(merged.get_double(field) == doctest::Approx(expect));
        CHECK(merged.entry(field).level == level);
    }
}

TEST_CASE("advisor value never displaces climate or realtime") {
    const std::string field = "t_air_c";
    ParamSource climate, advisor;
    climate.set(field, 28.5, "epw");
    advisor.set(field, 35.0, "suggestion");
    auto with = merge(builtin_defaults(), climate, {}, advisor, {});
    auto without = merge(builtin_defaults(), climate, {}, {}, {});
    CHECK(with.get_double(field) == without.get_double(field));
    CHECK(with.entry(field).level == without.entry(field).level);
}

TEST_CASE("incomplete defaults are rejected") {
    ParamSource partial;
    partial.set("t_air_c", 30.0, "only one field");
    CHECK_THROWS_AS(merge(partial, {}, {}, {}, {}), std::runtime_error);
}

TEST_CASE("winning value validation names field and source") {
    ParamSource user;
    user.set("albedo_roof", 1.3, "bad override");
    CHECK_THROWS_WITH_AS(merge(builtin_defaults(), {}, {}, {}, user),
                         doctest::Contains("albedo_roof"), std::runtime_error);
}

TEST_CASE("validate flags range violations") {
    auto params = merge(builtin_defaults(), {}, {}, {}, {});
    CHECK(validate(params).empty());

    params.set("albedo_wall", 1.3, ProvenanceLevel::User, "test");
    auto violations = validate(params);
    REQUIRE_FALSE(violations.empty());
    bool found = false;
    for (const auto& v : violations) found |= v.find("albedo_wall") != std::string::npos;
    CHECK(found);

    params.set("albedo_wall", 0.3, ProvenanceLevel::User, "test");
    params.set("slice_heights_m", std::vector<double>{2, 10, 10, 20},
               ProvenanceLevel::User, "test");
    violations = validate(params);
    found = false;
    for (const auto& v : violations)
        found |= v.find("strictly increasing") != std::string::npos;
    CHECK(found);
}

TEST_CASE("snapshot round-trip is exact and byte-stable") {
    auto dir = testsup::temp_dir("params_snap");
    ParamSource climate, user;
    climate.set("t_air_c", 29.4, "epw apr20");
    user.set("wind_speed_10m_ms", 6.2, "cli");
    auto params = merge(builtin_defaults(), climate, {}, {}, user);

    auto p1 = dir / "snap1.json";
    auto p2 = dir / "snap2.json";
    snapshot(params, p1.string());
    snapshot(params, p2.string());

    auto slurp = [](const std::filesystem::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
    };
    CHECK(slurp(p1) == slurp(p2));

    auto loaded = load_snapshot(p1.string());
    CHECK(loaded == params);

    // snapshot is human-reviewable: named levels, not numbers
    nlohmann::json j = nlohmann::json::parse(slurp(p1));
    CHECK(j["wind_speed_10m_ms"]["value"] == 6.2);
    CHECK(j["wind_speed_10m_ms"]["level"] == "user");
}

TEST_CASE("apply_delta and reverse restore the original") {
    auto base = merge(builtin_defaults(), {}, {}, {}, {});
    ParamDelta delta;
    delta.level = ProvenanceLevel::Advisor;
    delta.entries.push_back({"albedo_roof", base.entry("albedo_roof").value, 0.65,
                             "mitigation proposal"});

    auto modified = apply_delta(base, delta);
    CHECK(modified.get_double("albedo_roof") == doctest::Approx(0.65));
    CHECK(base.get_double("albedo_roof") == doctest::Approx(0.20));  // base untouched

    auto restored = apply_delta(modified, delta.reversed());
    CHECK(restored.get_double("albedo_roof") == doctest::Approx(0.20));

    ParamDelta empty;
    auto same = apply_delta(base, empty);
    CHECK(same == base);

    ParamDelta unknown;
    unknown.entries.push_back({"nonexistent.field", 0, 1, "typo"});
    CHECK_THROWS_AS(apply_delta(base, unknown), std::runtime_error);
}

TEST_CASE("delta json round-trip") {
    ParamDelta delta;
    delta.level = ProvenanceLevel::User;
    delta.entries.push_back({"albedo_ground", 0.15, 0.40, "bright pavement"});
    auto j = delta_to_json(delta);
    auto back = delta_from_json(j);
    REQUIRE(back.entries.size() == 1);
    CHECK(back.entries[0].field == "albedo_ground");
    CHECK(back.level == ProvenanceLevel::User);
}

TEST_CASE("duplicate keys within one source file are a hard error") {
    auto dir = testsup::temp_dir("params_dup");
    auto path = dir / "dup.json";
    std::ofstream(path) << R"({"albedo_roof": 0.2, "albedo_roof": 0.5})";
    CHECK_THROWS_WITH_AS(load_param_file(path.string(), "test"),
                         doctest::Contains("duplicate key"), std::runtime_error);
}

TEST_CASE("merge is idempotent") {
    ParamSource climate;
    climate.set("rh_pct", 81.0, "epw");
    auto once = merge(builtin_defaults(), climate, {}, {}, {});
    auto twice = merge(builtin_defaults(), climate, {}, {}, {});
    CHECK(once == twice);
}
