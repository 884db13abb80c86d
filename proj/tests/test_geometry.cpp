#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include <json.hpp>

#include "support.hpp"
#include "umc/geometry.hpp"

using namespace umc;

TEST_CASE("two cubes index with lexicographic ids and correct heights") {
    auto dir = testsup::temp_dir("geo_two");
    testsup::write_box_stl(dir / "b001.stl", 0, 0, 1, 1, 1);
    testsup::write_box_stl(dir / "b002.stl", 10, 0, 11, 1, 1);

    auto set = build_index(dir.string(), {});
    REQUIRE(set.buildings.size() == 2);
    CHECK(set.buildings[0].id == "b001");
    CHECK(set.buildings[1].id == "b002");
    CHECK(set.buildings[0].height_m == doctest::Approx(1.0));
    CHECK(set.buildings[1].height_m == doctest::Approx(1.0));
    CHECK(set.combined.triangles.size() == 24);
}

TEST_CASE("filename stem collisions get numeric suffixes") {
    auto dir = testsup::temp_dir("geo_coll");
    testsup::write_box_stl(dir / "TOWER.stl", 0, 0, 1, 1, 1);
    testsup::write_box_stl(dir / "tower.stl", 5, 0, 6, 1, 1);
    auto set = build_index(dir.string(), {});
    REQUIRE(set.buildings.size() == 2);
    CHECK(set.buildings[0].id == "tower");
    CHECK(set.buildings[1].id == "tower_1");
}

TEST_CASE("prism statistics: height, footprint, volume, envelope") {
    auto dir = testsup::temp_dir("geo_prism");
    testsup::write_box_stl(dir / "slab.stl", 0, 0, 20, 20, 30);
    auto set = build_index(dir.string(), {});
    const auto& b = set.buildings.at(0);
    CHECK(b.height_m == doctest::Approx(30.0));
    CHECK(b.footprint_area_m2 == doctest::Approx(400.0));
    CHECK(b.volume_m3 == doctest::Approx(12000.0).epsilon(1e-9));
    CHECK_FALSE(b.volume_approximate);
    // envelope excludes the base: 4 walls + roof
    CHECK(b.envelope_area_m2 == doctest::Approx(4 * 20 * 30 + 400.0));
    CHECK(b.envelope_area_m2 >= b.footprint_area_m2);
}

TEST_CASE("ground plane buffering") {
    Aabb box;
    box.expand(Vec3{0, 0, 0});
    box.expand(Vec3{1000, 500, 0});

    auto plane = generate_ground_plane(box, 1.2, 50.0);
    auto pb = plane.bbox();
    CHECK(pb.lo.x == doctest::Approx(-100.0));
    CHECK(pb.hi.x == doctest::Approx(1100.0));
    CHECK(pb.lo.z == doctest::Approx(0.0));

    auto exact = generate_ground_plane(box, 1.0, 50.0);
    auto eb = exact.bbox();
    CHECK(eb.lo.x == doctest::Approx(0.0));
    CHECK(eb.hi.x == doctest::Approx(1000.0));

    Aabb degenerate;
    degenerate.expand(Vec3{5, 5, 0});
    CHECK_THROWS_WITH_AS(generate_ground_plane(degenerate, 1.2, 50.0),
                         doctest::Contains("degenerate plan extents"),
                         std::runtime_error);
}

TEST_CASE("footprint rasterization honours slice height") {
    auto dir = testsup::temp_dir("geo_rast");
    testsup::write_box_stl(dir / "cube.stl", 0, 0, 20, 20, 30);
    auto set = build_index(dir.string(), {});

    auto mask2 = rasterize_footprints(set, 2.0, 2.0);
    int count = 0;
    for (auto c : mask2.cells) count += c != 0;
    CHECK(count == 100);  // 10x10 block of 2 m cells

    auto mask50 = rasterize_footprints(set, 2.0, 50.0);
    int above = 0;
    for (auto c : mask50.cells) above += c != 0;
    CHECK(above == 0);

    // monotone in slice height
    auto mask20 = rasterize_footprints(set, 2.0, 20.0);
    for (size_t i = 0; i < mask20.cells.size(); ++i)
        if (mask50.cells[i]) CHECK(mask20.cells[i]);
}

TEST_CASE("index map has one polygon and one label per building") {
    auto dir = testsup::temp_dir("geo_svg");
    testsup::write_box_stl(dir / "b001.stl", 0, 0, 10, 10, 5);
    testsup::write_box_stl(dir / "b002.stl", 30, 0, 40, 10, 5);
    auto set = build_index(dir.string(), {});

    auto svg_path = dir / "map.svg";
    render_index_map(set, svg_path.string());
    std::ifstream in(svg_path);
    std::string svg((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
    size_t polys = 0, labels = 0, pos = 0;
    while ((pos = svg.find("<polygon", pos)) != std::string::npos) { ++polys; ++pos; }
    pos = 0;
    while ((pos = svg.find("<text", pos)) != std::string::npos) { ++labels; ++pos; }
    CHECK(polys == 2);
    CHECK(labels == 2);
    CHECK(svg.find(">b001<") != std::string::npos);
    CHECK(svg.find(">b002<") != std::string::npos);
}

TEST_CASE("rigid translation shifts bboxes, preserves statistics") {
    auto dir1 = testsup::temp_dir("geo_t1");
    auto dir2 = testsup::temp_dir("geo_t2");
    testsup::write_box_stl(dir1 / "a.stl", 0, 0, 12, 8, 15);
    testsup::write_box_stl(dir2 / "a.stl", 100, 250, 112, 258, 15);
    auto s1 = build_index(dir1.string(), {});
    auto s2 = build_index(dir2.string(), {});
    CHECK(s2.buildings[0].bbox.lo.x - s1.buildings[0].bbox.lo.x ==
          doctest::Approx(100.0));
    CHECK(s2.buildings[0].bbox.lo.y - s1.buildings[0].bbox.lo.y ==
          doctest::Approx(250.0));
    CHECK(s1.buildings[0].height_m == doctest::Approx(s2.buildings[0].height_m));
    CHECK(s1.buildings[0].footprint_area_m2 ==
          doctest::Approx(s2.buildings[0].footprint_area_m2));
    CHECK(s1.buildings[0].volume_m3 == doctest::Approx(s2.buildings[0].volume_m3));
}

TEST_CASE("empty directory is an error") {
    auto dir = testsup::temp_dir("geo_empty");
    CHECK_THROWS_AS(build_index(dir.string(), {}), std::runtime_error);
}

TEST_CASE("building index json carries the documented fields") {
    auto dir = testsup::temp_dir("geo_json");
    testsup::write_box_stl(dir / "b001.stl", 0, 0, 10, 10, 5);
    auto set = build_index(dir.string(), {});
    auto path = dir / "building_index.json";
    write_building_index_json(set, path.string());
    std::ifstream in(path);
    nlohmann::json j;
    in >> j;
    REQUIRE(j.is_array());
    REQUIRE(j.size() == 1);
    for (const char* key : {"id", "file", "bbox_xy", "height_m", "footprint_area_m2",
                            "volume_m3", "envelope_area_m2"})
        CHECK(j[0].contains(key));
}

TEST_CASE("footprint membership") {
    auto dir = testsup::temp_dir("geo_member");
    testsup::write_box_stl(dir / "b.stl", 0, 0, 10, 10, 5);
    auto set = build_index(dir.string(), {});
    CHECK(set.buildings[0].footprint_contains(5, 5));
    CHECK_FALSE(set.buildings[0].footprint_contains(15, 5));
    CHECK(set.buildings[0].footprint_distance(5, 5) == doctest::Approx(0.0));
    CHECK(set.buildings[0].footprint_distance(13, 5) == doctest::Approx(3.0).epsilon(0.05));
}
