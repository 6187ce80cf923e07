#include "forge/synthetic.hpp"

#include <sstream>

#include "forge/csv.hpp"
#include "forge/energy.hpp"
#include "forge/rng.hpp"
#include "json.hpp"

namespace forge {

namespace {

constexpr double kOriginX = 552000.0;
constexpr double kOriginY = 4182000.0;
constexpr double kLotPitch = 160.0;

Ring closed(std::vector<Point> pts) {
  pts.push_back(pts.front());
  return pts;
}

Ring family_outline(Family f, Rng& rng) {
  switch (f) {
    case Family::Bar: {
      const double len = rng.uniform(44.0, 56.0), wid = rng.uniform(10.0, 14.0);
      return closed({{0, 0}, {len, 0}, {len, wid}, {0, wid}});
    }
    case Family::LShape: {
      const double a = rng.uniform(30.0, 38.0), b = rng.uniform(30.0, 38.0), t = rng.uniform(10.0, 12.0);
      return closed({{0, 0}, {a, 0}, {a, t}, {t, t}, {t, b}, {0, b}});
    }
    case Family::UShape: {
      const double w = rng.uniform(40.0, 48.0), h = rng.uniform(30.0, 36.0), t = rng.uniform(10.0, 12.0);
      return closed({{0, 0}, {w, 0}, {w, h}, {w - t, h}, {w - t, t}, {t, t}, {t, h}, {0, h}});
    }
    case Family::Tower: {
      const double s = rng.uniform(18.0, 24.0);
      return closed({{0, 0}, {s, 0}, {s, s}, {0, s}});
    }
  }
  return {};
}

double family_height(Family f, Rng& rng) {
  switch (f) {
    case Family::Bar: return rng.uniform(9.0, 15.0);
    case Family::LShape: return rng.uniform(18.0, 24.0);
    case Family::UShape: return rng.uniform(30.0, 38.0);
    case Family::Tower: return rng.uniform(60.0, 80.0);
  }
  return 0.0;
}

}  // namespace

SyntheticDistrict make_synthetic_district(const SyntheticOptions& options) {
  Rng rng(options.seed);
  // Slot list: family index or -1, shuffled so families interleave in file order.
  std::vector<int> slots;
  for (int f = 0; f < 4; ++f) slots.insert(slots.end(), static_cast<std::size_t>(options.per_family), f);
  slots.insert(slots.end(), static_cast<std::size_t>(options.non_residential), -1);
  rng.shuffle(std::span(slots));

  const int per_row = 25;
  SyntheticDistrict d;
  double actual = 0.0, floor = 0.0;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const double lot_x = kOriginX + static_cast<double>(i % per_row) * kLotPitch;
    const double lot_y = kOriginY + static_cast<double>(i / per_row) * kLotPitch;
    BuildingRecord r;
    char id[32];
    std::snprintf(id, sizeof id, "b%04zu", i);
    r.id = id;
    if (slots[i] >= 0) {
      const auto f = static_cast<Family>(slots[i]);
      r.footprint.rings.push_back(family_outline(f, rng));
      r.height_m = family_height(f, rng);
      r.land_use = LandUse::Residential;
      r.measured_eui_kwh_m2 = kFamilyEui[slots[i]] * (1.0 + options.eui_jitter * rng.uniform(-1.0, 1.0));
    } else {
      const double w = rng.uniform(15.0, 60.0), h = rng.uniform(15.0, 60.0);
      r.footprint.rings.push_back(closed({{0, 0}, {w, 0}, {w, h}, {0, h}}));
      r.height_m = rng.uniform(5.0, 40.0);
      r.land_use = LandUse::Other;
    }
    r.footprint = translated(r.footprint, lot_x, lot_y);
    r.footprint_area_m2 = polygon_area(r.footprint);
    r.floor_area_m2 = derive_floor_area(r.footprint_area_m2, r.height_m);
    if (r.land_use == LandUse::Residential) {
      actual += r.floor_area_m2 * *r.measured_eui_kwh_m2;
      floor += r.floor_area_m2;
    }
    d.records.push_back(std::move(r));
    d.family.push_back(slots[i]);
  }
  // Flat EUI that underestimates the district like the prototype baseline.
  d.baseline_eui = implied_baseline_eui(actual, actual / floor, 0.6585);
  return d;
}

void write_synthetic_bundle(const std::filesystem::path& dir, const SyntheticOptions& options, int epochs) {
  std::filesystem::create_directories(dir);
  const SyntheticDistrict d = make_synthetic_district(options);
  write_text(dir / "inventory.geojson", to_geojson(d.records));

  write_text(dir / "pbm_eui.csv", eui_table_csv(EuiTable({{std::string(kBaselineArchetype), d.baseline_eui, true}})));

  std::ostringstream fam;
  fam << "building_id,family\n";
  for (std::size_t i = 0; i < d.records.size(); ++i) {
    if (d.family[i] >= 0) fam << d.records[i].id << ',' << kFamilyNames[d.family[i]] << '\n';
  }
  write_text(dir / "families.csv", fam.str());

  const nlohmann::json config = {
      {"inventory", "inventory.geojson"},
      {"land_use_filter", "residential"},
      {"zone", "synthetic"},
      {"eui", {{"baseline", "pbm_eui.csv"}}},
      {"out", "out"},
      {"seed", 7},
      {"test_fraction", 0.1},
      {"grid", {{"width_px", 64}, {"meters_per_px", 2.0}}},
      {"vq", {{"epochs", epochs}}},
      {"cluster", {{"k", 4}, {"k_min", 1}, {"k_max", 8}}},
  };
  write_text(dir / "config.json", config.dump(2) + "\n");
}

}  // namespace forge
