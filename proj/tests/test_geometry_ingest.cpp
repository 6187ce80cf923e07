#include <string>

#include "doctest.h"
#include "forge/geo_ingest.hpp"
#include "forge/geometry.hpp"

using namespace forge;

namespace {

std::string feature(const std::string& id, const std::string& land_use, double height, const std::string& coords,
                    const std::string& type = "Polygon") {
  return R"({"type":"Feature","id":")" + id + R"(","properties":{"height_m":)" + std::to_string(height) +
         R"(,"land_use":")" + land_use + R"("},"geometry":{"type":")" + type + R"(","coordinates":)" + coords + "}}";
}

std::string square(double x0, double y0, double s) {
  auto p = [](double x, double y) { return "[" + std::to_string(x) + "," + std::to_string(y) + "]"; };
  return "[[" + p(x0, y0) + "," + p(x0 + s, y0) + "," + p(x0 + s, y0 + s) + "," + p(x0, y0 + s) + "," + p(x0, y0) + "]]";
}

std::string collection(const std::string& features) {
  return R"({"type":"FeatureCollection","features":[)" + features + "]}";
}

}  // namespace

TEST_CASE("shoelace area subtracts holes") {
  Polygon p;
  p.rings.push_back({{0, 0}, {10, 0}, {10, 10}, {0, 10}, {0, 0}});
  CHECK(polygon_area(p) == doctest::Approx(100.0));
  p.rings.push_back({{2, 2}, {4, 2}, {4, 4}, {2, 4}, {2, 2}});
  CHECK(polygon_area(p) == doctest::Approx(96.0));
  CHECK(is_closed(p.rings[0]));
  CHECK_FALSE(is_closed({{0, 0}, {1, 0}, {0, 0}}));
}

TEST_CASE("floor area from storeys") {
  CHECK(derive_floor_area(100, 3.0, 3.0) == 100);
  CHECK(derive_floor_area(100, 9.1, 3.0) == 300);
  CHECK(derive_floor_area(250, 30.0, 3.0) == 2500);
  CHECK(derive_floor_area(100, 1.0, 3.0) == 100);
  CHECK_THROWS_AS(derive_floor_area(0, 3.0), DataError);
  CHECK_THROWS_AS(derive_floor_area(100, -1.0), DataError);
  double prev = 0;
  for (double h = 0.5; h <= 100; h += 0.25) {
    const double a = derive_floor_area(50, h);
    CHECK(a >= prev);
    CHECK(a >= 50);
    prev = a;
  }
}

TEST_CASE("residential filter on a three-feature fixture") {
  const auto text = collection(feature("a", "residential", 9, square(0, 0, 10)) + "," +
                               feature("b", "Residential", 12, square(50, 0, 10)) + "," +
                               feature("c", "commercial", 20, square(100, 0, 10)));
  const auto inv = parse_inventory(text, {LandUse::Residential});
  REQUIRE(inv.records.size() == 2);
  CHECK(inv.records[0].id == "a");
  CHECK(inv.records[1].id == "b");
  CHECK(inv.summary.total_count == 3);
  CHECK(inv.summary.residential_count == 2);
  CHECK(inv.summary.residential_fraction == doctest::Approx(2.0 / 3.0));

  const auto all = parse_inventory(text);
  CHECK(all.records.size() == 3);
  const auto once = filter_land_use(all.records, LandUse::Residential);
  const auto twice = filter_land_use(once, LandUse::Residential);
  CHECK(once.size() == twice.size());
}

TEST_CASE("empty inventory is an explicit error with zero counts") {
  try {
    parse_inventory(collection(""));
    FAIL("expected EmptyInventoryError");
  } catch (const EmptyInventoryError& e) {
    CHECK(e.summary().total_count == 0);
    CHECK(e.exit_code() == 3);
  }
}

TEST_CASE("invalid features are rejected with diagnostics") {
  const auto text = collection(
      feature("ok", "residential", 9, square(0, 0, 10)) + "," +
      feature("neg", "residential", -3, square(0, 0, 10)) + "," +
      feature("open", "residential", 9, "[[[0,0],[10,0],[10,10],[0,10]]]") + "," +
      feature("pt", "residential", 9, "[1,2]", "Point") + "," +
      feature("lonlat", "residential", 9, square(-122.41, 37.8, 0.0002)) + "," +
      R"({"type":"Feature","properties":{"land_use":"residential"},"geometry":{"type":"Polygon","coordinates":)" +
      square(0, 0, 10) + "}}");
  const auto inv = parse_inventory(text);
  REQUIRE(inv.records.size() == 1);
  CHECK(inv.records[0].id == "ok");
  CHECK(inv.summary.rejected_count == 5);
  CHECK(inv.diagnostics.size() == 5);
}

TEST_CASE("tall buildings clamp to the encoding range") {
  const auto inv = parse_inventory(collection(feature("t", "residential", 180, square(0, 0, 10))));
  REQUIRE(inv.records.size() == 1);
  CHECK(inv.records[0].height_m == 100.0);
  CHECK(inv.diagnostics.size() == 1);
}

TEST_CASE("multipolygons split into suffixed records") {
  const std::string coords = "[" + square(0, 0, 10) + "," + square(30, 0, 5) + "]";
  const auto inv = parse_inventory(collection(feature("m", "residential", 6, coords, "MultiPolygon")));
  REQUIRE(inv.records.size() == 2);
  CHECK(inv.records[0].id == "m_0");
  CHECK(inv.records[1].id == "m_1");
  CHECK(inv.records[1].footprint_area_m2 == doctest::Approx(25.0));
  CHECK(inv.records[1].floor_area_m2 == doctest::Approx(50.0));
}

TEST_CASE("geojson round trip preserves records") {
  const auto text = collection(feature("a", "residential", 9, square(0, 0, 10)) + "," +
                               feature("c", "other", 33.3, square(100, 0, 12.5)));
  const auto first = parse_inventory(text);
  const auto second = parse_inventory(to_geojson(first.records));
  REQUIRE(first.records.size() == second.records.size());
  for (std::size_t i = 0; i < first.records.size(); ++i) {
    CHECK(first.records[i].id == second.records[i].id);
    CHECK(first.records[i].height_m == second.records[i].height_m);
    CHECK(first.records[i].land_use == second.records[i].land_use);
    CHECK(first.records[i].floor_area_m2 == second.records[i].floor_area_m2);
    CHECK(first.records[i].footprint.rings == second.records[i].footprint.rings);
  }
}
