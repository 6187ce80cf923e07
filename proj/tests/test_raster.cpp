#include <set>

#include "criteria.hpp"
#include "doctest.h"
#include "forge/raster.hpp"
#include "forge/rng.hpp"

using namespace forge;

namespace {

BuildingRecord rect(const std::string& id, double x0, double y0, double w, double h, double height) {
  BuildingRecord r;
  r.id = id;
  r.footprint.rings.push_back({{x0, y0}, {x0 + w, y0}, {x0 + w, y0 + h}, {x0, y0 + h}, {x0, y0}});
  r.height_m = height;
  r.footprint_area_m2 = w * h;
  r.floor_area_m2 = w * h;
  return r;
}

}  // namespace

TEST_CASE("full-window square maps height linearly") {
  const GridSpec spec;
  for (double height : {100.0, 50.0}) {
    const auto m = rasterize(rect("sq", 0, 0, 128, 128, height), spec);
    for (double v : m.pixels) CHECK(v == doctest::Approx(height / 100.0));
  }
}

TEST_CASE("window overflow and degenerate footprints are errors") {
  const GridSpec spec;
  CHECK_THROWS_WITH_AS(rasterize(rect("big", 0, 0, 130, 10, 10), spec), doctest::Contains("big"), DataError);
  CHECK_THROWS_AS(rasterize(rect("flat", 0, 0, 10, 0, 10), spec), DataError);
  CHECK_THROWS_AS(validate(GridSpec{48, 48, 2.0}), ConfigError);
  CHECK_THROWS_AS(validate(GridSpec{64, 32, 2.0}), ConfigError);
}

TEST_CASE("scanline fill matches point-in-polygon oracle") {
  const auto o = criteria::rasterizer_oracle(100);
  INFO(o.detail);
  CHECK(o.pass);
}

TEST_CASE("holes subtract and area is approximated") {
  BuildingRecord r = rect("ring", 0, 0, 40, 40, 20);
  r.footprint.rings.push_back({{10, 10}, {30, 10}, {30, 30}, {10, 30}, {10, 10}});
  const auto m = rasterize(r, GridSpec{});
  int inside = 0;
  for (double v : m.pixels) {
    CHECK((v == 0.0 || v == doctest::Approx(0.2)));
    inside += v > 0;
  }
  CHECK(inside * 4.0 == doctest::Approx(1200.0).epsilon(0.1));
  CHECK(m.at(32, 32) == 0.0);
}

TEST_CASE("translation by whole pixels leaves the heightmap unchanged") {
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    const auto a = rect("a", rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(5, 60), rng.uniform(5, 60), 30);
    BuildingRecord b = a;
    b.footprint = translated(a.footprint, 2.0 * static_cast<double>(rng.index(100)), -2.0 * static_cast<double>(rng.index(100)));
    CHECK(rasterize(a, GridSpec{}).pixels == rasterize(b, GridSpec{}).pixels);
  }
}

TEST_CASE("serial and parallel batch rasterization agree") {
  std::vector<BuildingRecord> recs;
  for (int i = 0; i < 30; ++i) recs.push_back(rect("r" + std::to_string(i), i * 200.0, 0, 10 + i, 12, 5 + i));
  recs.push_back(rect("huge", 0, 0, 500, 500, 10));
  const auto s = rasterize_all(recs, GridSpec{}, Exec::Serial);
  const auto p = rasterize_all(recs, GridSpec{}, Exec::Parallel);
  REQUIRE(s.maps.size() == 30);
  CHECK(s.diagnostics.size() == 1);
  for (std::size_t i = 0; i < s.maps.size(); ++i) CHECK(s.maps[i].pixels == p.maps[i].pixels);
}

TEST_CASE("dataset split is seeded, disjoint and sized by rounding") {
  std::vector<BuildingRecord> recs;
  for (int i = 0; i < 10; ++i) recs.push_back(rect("r" + std::to_string(i), 0, 0, 10 + i, 10, 10));
  const auto a = build_dataset(recs, GridSpec{}, 0.2, 7);
  const auto b = build_dataset(recs, GridSpec{}, 0.2, 7);
  CHECK(a.train.size() == 8);
  CHECK(a.test.size() == 2);
  std::set<std::string> ids;
  for (const auto* part : {&a.train, &a.test})
    for (const auto& m : *part) ids.insert(m.building_id);
  CHECK(ids.size() == 10);
  for (std::size_t i = 0; i < a.test.size(); ++i) CHECK(a.test[i].building_id == b.test[i].building_id);
  CHECK(build_dataset(recs, GridSpec{}, 0.01, 1).test.size() == 1);
  CHECK_THROWS_AS(build_dataset(std::span(recs).first(1), GridSpec{}, 0.5, 1), DataError);
}
