#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "support.hpp"
#include "umc/comfort.hpp"

using namespace umc;

namespace {

// Reference values from an independent MEMI energy-balance implementation
// (core/skin/clothing nodes, reference environment MRT = Ta, v = 0.1 m/s,
// vp = 12 hPa), frozen here.
struct PetCase { double ta, mrt, v, rh, expected; };
const PetCase kPetTable[] = {
    {20.0, 20.0, 0.1, 51.31, 20.000},
    {30.0, 30.0, 1.0, 70.00, 29.152},
    {30.0, 60.0, 1.0, 70.00, 43.705},
    {34.0, 65.0, 0.5, 60.00, 52.159},
    {24.0, 40.0, 2.0, 50.00, 22.723},
};

ComfortGrid flat_grid(int hour, int nx, int ny, double pet_base) {
    ComfortGrid g;
    g.hour = hour;
    g.nx = nx;
    g.ny = ny;
    g.cell_size = 2.0;
    size_t n = static_cast<size_t>(nx) * ny;
    g.valid.assign(n, 1);
    g.lit.assign(n, 1);
    g.pet_c.assign(n, pet_base);
    g.mrt_c.assign(n, pet_base + 10.0);
    g.wind_ms.assign(n, 2.0);
    g.svf.assign(n, 0.5);
    g.reflected_sw.assign(n, 20.0);
    return g;
}

BuildingSet two_building_set(const std::filesystem::path& dir) {
    testsup::write_box_stl(dir / "alpha.stl", 0, 0, 10, 10, 12);
    testsup::write_box_stl(dir / "beta.stl", 30, 0, 40, 10, 12);
    return build_index(dir.string(), {});
}

}  // namespace

TEST_CASE("PET matches the frozen reference table") {
    for (const auto& c : kPetTable) {
        CAPTURE(c.ta);
        CAPTURE(c.mrt);
        double p = pet(c.ta, c.mrt, c.v, c.rh);
        CHECK(std::abs(p - c.expected) <= 0.5);
    }
}

TEST_CASE("reference environment is a fixed point") {
    // Ta = MRT = 20 C, v = 0.1 m/s, vp = 12 hPa (51.31 % RH at 20 C)
    CHECK(pet(20.0, 20.0, 0.1, 51.31) == doctest::Approx(20.0).epsilon(0.1 / 20.0));
}

TEST_CASE("PET responds monotonically to MRT and wind") {
    double base = pet(30.0, 30.0, 1.0, 70.0);
    double hot_mrt = pet(30.0, 55.0, 1.0, 70.0);
    CHECK(hot_mrt > base + 5.0);

    // in a hot radiant environment more wind cools
    double prev = 1e9;
    for (double v : {0.1, 0.5, 1.0, 2.0, 4.0}) {
        double p = pet(32.0, 60.0, v, 65.0);
        CHECK(p < prev);
        prev = p;
    }
}

TEST_CASE("PET accepts person variations") {
    PersonParams heavy;
    heavy.weight_kg = 110.0;
    PersonParams light;
    light.weight_kg = 50.0;
    double ph = pet(32.0, 55.0, 1.0, 65.0, heavy);
    double pl = pet(32.0, 55.0, 1.0, 65.0, light);
    CHECK(ph != doctest::Approx(pl).epsilon(1e-6));
    CHECK(std::abs(ph - pl) < 8.0);  // same order of magnitude
}

TEST_CASE("face cooling flux") {
    WallProps wall;  // U = 2.5, setpoint 25, weights {1}
    CHECK(face_cooling_flux({30.0}, wall, 0) == doctest::Approx(12.5));
    CHECK(face_cooling_flux({20.0}, wall, 0) == doctest::Approx(0.0));  // floored

    // CTF weights average over history; indices before start clamp
    wall.ctf_weights = {0.5, 0.5};
    std::vector<double> hist{27.0, 31.0};
    CHECK(face_cooling_flux(hist, wall, 1) ==
          doctest::Approx(2.5 * (0.5 * (31 - 25) + 0.5 * (27 - 25))));
    CHECK(face_cooling_flux(hist, wall, 0) == doctest::Approx(2.5 * (27 - 25)));
}

TEST_CASE("building cooling load example") {
    // two faces, 2 and 3 m2, constant 100 W/m2 for 24 h -> 12 kWh
    std::vector<double> areas{2.0, 3.0};
    std::vector<std::vector<double>> flux(2, std::vector<double>(24, 100.0));
    auto e = building_cooling_load("b001", areas, flux, 20.0);
    CHECK(e.daily_energy_kwh == doctest::Approx(12.0));
    CHECK(e.eui_kwh_m2 == doctest::Approx(0.6));
    REQUIRE(e.hourly_power_w.size() == 24);
    CHECK(e.hourly_power_w[0] == doctest::Approx(500.0));

    // homogeneity: doubling flux doubles energy
    for (auto& f : flux)
        for (auto& v : f) v *= 2.0;
    auto e2 = building_cooling_load("b001", areas, flux, 20.0);
    CHECK(e2.daily_energy_kwh == doctest::Approx(24.0));

    CHECK_THROWS_AS(building_cooling_load("bad", areas, flux, 0.0), std::runtime_error);
    CHECK_THROWS_AS(
        building_cooling_load("bad", {2.0}, flux, 20.0),  // area/series mismatch
        std::runtime_error);
}

TEST_CASE("energy outliers") {
    auto mk = [](std::string id, double eui) {
        BuildingEnergy e;
        e.id = std::move(id);
        e.eui_kwh_m2 = eui;
        return e;
    };
    auto out = energy_outliers({mk("a", 1), mk("b", 1), mk("c", 1), mk("d", 5)});
    REQUIRE(out.size() == 4);
    CHECK(out[0].id == "d");  // sorted by EUI descending
    CHECK(out[0].outlier);
    CHECK_FALSE(out[1].outlier);
    CHECK_FALSE(out[2].outlier);
    CHECK_FALSE(out[3].outlier);

    // identical EUIs: nothing flagged
    auto same = energy_outliers({mk("a", 2), mk("b", 2), mk("c", 2)});
    for (const auto& e : same) CHECK_FALSE(e.outlier);
}

TEST_CASE("hotspot scan finds the injected maximum and its context") {
    auto dir = testsup::temp_dir("comfort_hotspot");
    auto set = two_building_set(dir);

    auto g13 = flat_grid(13, 25, 10, 35.0);
    auto g14 = flat_grid(14, 25, 10, 34.0);
    // spike at cell (i=10, j=4): x = 21, y = 9 -> within 50 m of both boxes
    size_t k = g13.idx(10, 4);
    g13.pet_c[k] = 44.0;
    g13.mrt_c[k] = 62.0;
    g13.wind_ms[k] = 0.4;        // low wind
    g13.svf[k] = 0.9;            // high sky view
    g13.reflected_sw[k] = 150.0; // reflected gain

    auto spots = hotspot_scan({g13, g14}, set, {});
    REQUIRE_FALSE(spots.empty());
    const auto& top = spots.front();
    CHECK(top.hour == 13);
    CHECK(top.pet_c == doctest::Approx(44.0));
    CHECK(top.x == doctest::Approx(21.0));
    CHECK(top.y == doctest::Approx(9.0));
    CHECK(top.nearest_buildings.size() <= 2);
    REQUIRE_FALSE(top.nearest_buildings.empty());
    CHECK(top.nearest_buildings[0] == "beta");  // 9 m away vs 11 m to alpha

    auto has = [&](const char* tag) {
        return std::find(top.causes.begin(), top.causes.end(), tag) != top.causes.end();
    };
    CHECK(has("low wind"));
    CHECK(has("high svf"));
    CHECK(has("reflected gain"));

    // the hour-14 maximum ranks after the global one
    REQUIRE(spots.size() >= 2);
    CHECK(spots[0].pet_c >= spots[1].pet_c);
}

TEST_CASE("hotspot ties resolve to the lexicographically first cell, stably") {
    auto dir = testsup::temp_dir("comfort_ties");
    auto set = two_building_set(dir);

    auto base = flat_grid(12, 20, 20, 30.0);
    std::vector<size_t> tied = {base.idx(3, 2), base.idx(15, 2), base.idx(3, 17),
                                base.idx(9, 9)};
    for (auto k : tied) base.pet_c[k] = 41.5;

    auto first = hotspot_scan({base}, set, {});
    REQUIRE_FALSE(first.empty());
    // lexicographic (x, y): smallest x wins, then smallest y -> cell (3, 2)
    CHECK(first[0].x == doctest::Approx(base.origin_x + (3 + 0.5) * base.cell_size));
    CHECK(first[0].y == doctest::Approx(base.origin_y + (2 + 0.5) * base.cell_size));

    // rebuilding the grid with tied values written in shuffled orders must not
    // change the scan output
    std::mt19937 rng(1234);
    for (int trial = 0; trial < 100; ++trial) {
        auto g = flat_grid(12, 20, 20, 30.0);
        auto order = tied;
        std::shuffle(order.begin(), order.end(), rng);
        for (auto k : order) g.pet_c[k] = 41.5;
        auto spots = hotspot_scan({g}, set, {});
        REQUIRE_FALSE(spots.empty());
        CHECK(spots[0].x == doctest::Approx(first[0].x));
        CHECK(spots[0].y == doctest::Approx(first[0].y));
        CHECK(spots[0].pet_c == doctest::Approx(first[0].pet_c));
    }
}

TEST_CASE("invalid cells never become hotspots") {
    auto dir = testsup::temp_dir("comfort_invalid");
    auto set = two_building_set(dir);

    auto g = flat_grid(10, 10, 10, 30.0);
    size_t k = g.idx(5, 5);
    g.pet_c[k] = 99.0;
    g.valid[k] = 0;  // inside a footprint
    auto spots = hotspot_scan({g}, set, {});
    REQUIRE_FALSE(spots.empty());
    CHECK(spots[0].pet_c == doctest::Approx(30.0));
}
