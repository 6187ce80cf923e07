#include "criteria.hpp"
#include "doctest.h"
#include "forge/energy.hpp"
#include "oracles.hpp"

using namespace forge;

namespace {

BuildingRecord building(const std::string& id, double floor_area, std::optional<double> eui = {}) {
  BuildingRecord r;
  r.id = id;
  r.floor_area_m2 = floor_area;
  r.footprint_area_m2 = floor_area;
  r.height_m = 3;
  r.land_use = LandUse::Residential;
  r.measured_eui_kwh_m2 = eui;
  return r;
}

}  // namespace

TEST_CASE("accuracy metric") {
  CHECK(accuracy(1.71e8, 1.52e8) == doctest::Approx(0.875));
  CHECK(accuracy(1.48e11, 2.24e11) == doctest::Approx(0.6607).epsilon(1e-4));
  CHECK(accuracy(5, 5) == 1.0);
  CHECK(accuracy(0, 5) == 0.0);
  CHECK(accuracy(20, 5) < 0.0);
  CHECK_THROWS_AS(accuracy(1, 0), DataError);
}

TEST_CASE("published table arithmetic reproduces within half a point") {
  const auto o = criteria::published_totals_arithmetic();
  INFO(o.detail);
  CHECK(o.pass);
}

TEST_CASE("each published row individually") {
  for (const auto& row : oracle::kPublishedTotals) {
    CAPTURE(row.zone);
    CHECK(std::abs(100 * accuracy(row.pbm, row.actual) - row.pbm_acc) <= 0.5);
    CHECK(std::abs(100 * accuracy(row.sample, row.actual) - row.sample_acc) <= 0.5);
    CHECK(std::abs(100 * accuracy(row.average, row.actual) - row.average_acc) <= 0.5);
  }
}

TEST_CASE("aggregation over archetypes") {
  const std::vector<BuildingRecord> recs = {building("a", 100), building("b", 200), building("c", 50)};
  const std::vector<int> labels = {0, 1, 0};
  const EuiTable table({{archetype_id(0), 10, true}, {archetype_id(1), 20, true}});
  CHECK(aggregate_total(recs, labels, table) == doctest::Approx(100 * 10 + 200 * 20 + 50 * 10));
  const EuiTable pbm({{std::string(kBaselineArchetype), 7, true}});
  CHECK(aggregate_baseline(recs, pbm) == doctest::Approx(350 * 7));
  const std::vector<int> missing = {0, 2, 0};
  CHECK_THROWS_AS(aggregate_total(recs, missing, table), DataError);
  CHECK_THROWS_AS(aggregate_measured(recs), DataError);
  CHECK_THROWS_AS(EuiTable({{"x", 1, true}, {"x", 2, true}}), DataError);
  CHECK_THROWS_AS(EuiTable({{"x", -1, true}}), DataError);
}

TEST_CASE("implied baseline reproduces the stated accuracy") {
  const std::vector<BuildingRecord> recs = {building("a", 100, 90), building("b", 300, 130)};
  const double actual = aggregate_measured(recs);
  const double eui = implied_baseline_eui(actual, actual / 400.0, 0.6585);
  const EuiTable pbm({{std::string(kBaselineArchetype), eui, true}});
  CHECK(accuracy(aggregate_baseline(recs, pbm), actual) == doctest::Approx(0.6585));
}

TEST_CASE("report layout") {
  const std::vector<ZoneTotals> zones = {{"z", 100, 60, 90, 120}};
  const auto report = compare_report(zones);
  CHECK(report.zones[0].sampled_improvement_pp == doctest::Approx(30.0));
  CHECK(report.zones[0].averaged_improvement_pp == doctest::Approx(20.0));
  CHECK(report.average.method_accuracy == doctest::Approx(0.85));
  const std::string csv = report_csv(report, "abc");
  CHECK(csv.rfind("# config_hash=abc\n", 0) == 0);
  CHECK(csv.find("zone,actual_kwh,baseline_kwh,baseline_accuracy_pct,method,method_kwh,method_accuracy_pct,improvement_pp") !=
        std::string::npos);
  CHECK(csv.find("\naverage,") != std::string::npos);
  CHECK(report_json(report, "abc").find("\"config_hash\"") != std::string::npos);
}
