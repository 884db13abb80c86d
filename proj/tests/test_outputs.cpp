#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "support.hpp"
#include "umc/outputs.hpp"

using namespace umc;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

FieldGrid small_grid() {
    FieldGrid g;
    g.nx = 2;
    g.ny = 2;
    g.spacing = 2.0;
    g.origin_z = 1.5;
    g.scalars.push_back({"pet", {30.0, 31.5, 29.25, 42.0}});
    g.vectors.push_back({"wind", {{1.0, 0.5, -0.25, 0.0}, {0.0, 2.0, 0.125, -1.0}}});
    return g;
}

}  // namespace

TEST_CASE("structured vtk layout") {
    auto dir = testsup::temp_dir("outputs_vtk");
    auto path = dir / "grid.vtk";
    write_vtk_structured(small_grid(), path.string());
    auto text = slurp(path);

    CHECK(text.rfind("# vtk DataFile Version 3.0", 0) == 0);
    CHECK(text.find("DATASET STRUCTURED_POINTS") != std::string::npos);
    CHECK(text.find("DIMENSIONS 2 2 1") != std::string::npos);
    CHECK(text.find("POINT_DATA 4") != std::string::npos);
    CHECK(text.find("SCALARS pet double") != std::string::npos);
    CHECK(text.find("VECTORS wind double") != std::string::npos);

    // scalar block carries exactly the four values in %.6e form
    CHECK(text.find("3.000000e+01") != std::string::npos);
    CHECK(text.find("4.200000e+01") != std::string::npos);

    // vector lines carry w = 0
    CHECK(text.find("1.000000e+00 0.000000e+00 0.000000e+00") != std::string::npos);
    CHECK(text.find("5.000000e-01 2.000000e+00 0.000000e+00") != std::string::npos);
}

TEST_CASE("structured vtk writes are byte-stable") {
    auto dir = testsup::temp_dir("outputs_stable");
    auto p1 = dir / "a.vtk";
    auto p2 = dir / "b.vtk";
    write_vtk_structured(small_grid(), p1.string());
    write_vtk_structured(small_grid(), p2.string());
    CHECK(slurp(p1) == slurp(p2));
}

TEST_CASE("structured vtk validates array lengths") {
    auto g = small_grid();
    g.scalars[0].second.pop_back();
    auto dir = testsup::temp_dir("outputs_badlen");
    CHECK_THROWS_AS(write_vtk_structured(g, (dir / "bad.vtk").string()),
                    std::runtime_error);
}

TEST_CASE("polydata vtk with cell data") {
    auto dir = testsup::temp_dir("outputs_poly");
    auto mesh = testsup::box_mesh(0, 0, 10, 10, 5);
    std::vector<double> temps(mesh.triangles.size(), 32.5);
    std::vector<int> ids(mesh.triangles.size(), 3);
    auto path = dir / "surf.vtk";
    write_vtk_polydata(mesh, {{"t_surf", temps}}, {{"building_id", ids}}, path.string());
    auto text = slurp(path);

    CHECK(text.find("DATASET POLYDATA") != std::string::npos);
    CHECK(text.find("POINTS 8 double") != std::string::npos);
    CHECK(text.find("POLYGONS 12 48") != std::string::npos);  // 12 tris, 4 ints each
    CHECK(text.find("CELL_DATA 12") != std::string::npos);
    CHECK(text.find("SCALARS t_surf double") != std::string::npos);
    CHECK(text.find("SCALARS building_id int") != std::string::npos);

    temps.pop_back();
    CHECK_THROWS_AS(write_vtk_polydata(mesh, {{"t_surf", temps}}, {},
                                       (dir / "bad.vtk").string()),
                    std::runtime_error);
}

TEST_CASE("metrics round-trip preserves every field") {
    RunMetrics m;
    BuildingEnergy e;
    e.id = "b001";
    e.hourly_power_w = {100.0, 250.5};
    e.daily_energy_kwh = 6.0;
    e.envelope_area_m2 = 10.0;
    e.eui_kwh_m2 = 0.6;
    e.outlier = true;
    m.building_energies.push_back(e);

    Hotspot h;
    h.x = 21.0;
    h.y = 9.0;
    h.hour = 13;
    h.pet_c = 44.0;
    h.mrt_c = 62.0;
    h.nearest_buildings = {"b001"};
    h.causes = {"low wind", "reflected gain"};
    m.hotspots.push_back(h);

    m.peak_pet_c = 44.0;
    m.peak_mrt_c = 62.0;
    m.hours.push_back({13, 44.0, 62.0, 350.5, 31.2, 2.5, 640.0});
    m.files["report"] = "report.md";

    auto dir = testsup::temp_dir("outputs_metrics");
    auto path = dir / "metrics.json";
    write_metrics(m, path.string());
    auto back = load_metrics(path.string());

    REQUIRE(back.building_energies.size() == 1);
    CHECK(back.building_energies[0].id == "b001");
    CHECK(back.building_energies[0].eui_kwh_m2 == doctest::Approx(0.6));
    CHECK(back.building_energies[0].outlier);
    REQUIRE(back.hotspots.size() == 1);
    CHECK(back.hotspots[0].causes.size() == 2);
    CHECK(back.hotspots[0].nearest_buildings[0] == "b001");
    CHECK(back.peak_pet_c == doctest::Approx(44.0));
    REQUIRE(back.hours.size() == 1);
    CHECK(back.hours[0].total_cooling_power_w == doctest::Approx(350.5));
    CHECK(back.files.at("report") == "report.md");

    // byte-stable rewrite
    auto path2 = dir / "metrics2.json";
    write_metrics(back, path2.string());
    CHECK(slurp(path) == slurp(path2));
}

TEST_CASE("metrics json keys carry units or are unit-free counters") {
    RunMetrics m;
    BuildingEnergy e;
    e.id = "b001";
    e.envelope_area_m2 = 10.0;
    m.building_energies.push_back(e);
    m.hotspots.push_back({});
    m.hours.push_back({});
    auto j = m.to_json();

    const std::set<std::string> unit_free = {
        "schema_version", "buildings", "hotspots", "hours",  "files",
        "id",             "outlier",   "hour",     "causes", "nearest_buildings",
    };
    auto has_unit_suffix = [](const std::string& k) {
        for (const char* s : {"_c", "_k", "_kwh", "_kwh_m2", "_w", "_wm2", "_m",
                              "_m2", "_ms", "_pct", "_deg", "_s"}) {
            std::string suf(s);
            if (k.size() > suf.size() &&
                k.compare(k.size() - suf.size(), suf.size(), suf) == 0)
                return true;
        }
        return false;
    };
    std::function<void(const nlohmann::ordered_json&)> walk =
        [&](const nlohmann::ordered_json& node) {
            if (node.is_object()) {
                for (auto it = node.begin(); it != node.end(); ++it) {
                    CAPTURE(it.key());
                    bool ok = unit_free.count(it.key()) > 0 || has_unit_suffix(it.key());
                    CHECK(ok);
                    walk(it.value());
                }
            } else if (node.is_array()) {
                for (const auto& v : node) walk(v);
            }
        };
    walk(j);
}

TEST_CASE("loading malformed metrics fails loudly") {
    auto dir = testsup::temp_dir("outputs_badjson");
    auto path = dir / "broken.json";
    std::ofstream(path) << "{ not json";
    CHECK_THROWS(load_metrics(path.string()));
    CHECK_THROWS(load_metrics((dir / "missing.json").string()));
}
