#include "forge/geo_ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "forge/log.hpp"
#include "json.hpp"

namespace forge {

using nlohmann::json;

namespace {

// Result of parsing one feature: zero or more records, zero or more notes.
struct FeatureResult {
  std::vector<BuildingRecord> records;
  std::vector<std::string> notes;
  bool rejected = false;
};

std::string feature_id(const json& feature, std::size_t index) {
  auto id_of = [](const json& v) -> std::optional<std::string> {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    return std::nullopt;
  };
  if (auto it = feature.find("id"); it != feature.end()) {
    if (auto s = id_of(*it)) return *s;
  }
  if (auto props = feature.find("properties"); props != feature.end() && props->is_object()) {
    if (auto it = props->find("id"); it != props->end()) {
      if (auto s = id_of(*it)) return *s;
    }
  }
  return "feature_" + std::to_string(index);
}

Ring parse_ring(const json& coords) {
  Ring ring;
  if (!coords.is_array()) throw DataError("ring is not an array");
  ring.reserve(coords.size());
  for (const auto& c : coords) {
    if (!c.is_array() || c.size() < 2 || !c[0].is_number() || !c[1].is_number()) {
      throw DataError("malformed coordinate");
    }
    ring.push_back({c[0].get<double>(), c[1].get<double>()});
  }
  return ring;
}

Polygon parse_polygon(const json& coords) {
  if (!coords.is_array() || coords.empty()) throw DataError("polygon has no rings");
  Polygon poly;
  for (const auto& r : coords) {
    Ring ring = parse_ring(r);
    if (!is_closed(ring)) throw DataError("unclosed ring or fewer than 4 vertices");
    poly.rings.push_back(std::move(ring));
  }
  return poly;
}

// Planar metres are required; a sub-centimetre footprint inside the lon/lat
// range is almost certainly geodetic.
bool looks_geodetic(const BBox& b) {
  const bool in_range = b.min_x >= -180.0 && b.max_x <= 180.0 && b.min_y >= -90.0 && b.max_y <= 90.0;
  return in_range && std::max(b.width(), b.height()) < 0.01;
}

FeatureResult parse_feature(const json& feature, std::size_t index, const IngestOptions& options) {
  FeatureResult out;
  const std::string id = feature_id(feature, index);
  auto reject = [&](const std::string& why) {
    out.records.clear();
    out.rejected = true;
    out.notes.push_back("rejected feature " + id + ": " + why);
    return out;
  };

  if (!feature.is_object() || feature.value("type", "") != "Feature") return reject("not a Feature");
  const auto geom = feature.find("geometry");
  if (geom == feature.end() || !geom->is_object()) return reject("missing geometry");
  const auto props_it = feature.find("properties");
  if (props_it == feature.end() || !props_it->is_object()) return reject("missing properties");
  const json& props = *props_it;

  const auto h = props.find("height_m");
  if (h == props.end() || !h->is_number()) return reject("missing height_m");
  double height = h->get<double>();
  if (!std::isfinite(height) || height <= 0.0) return reject("non-positive height_m");
  if (height > kMaxHeightM) {
    out.notes.push_back("feature " + id + ": height " + std::to_string(height) + " m clamped to 100 m");
    height = kMaxHeightM;
  }

  const auto lu = props.find("land_use");
  if (lu == props.end() || !lu->is_string()) return reject("missing land_use");
  const LandUse land_use = parse_land_use(lu->get<std::string>()).value_or(LandUse::Other);

  std::optional<double> eui;
  if (auto e = props.find("eui_kwh_m2"); e != props.end() && !e->is_null()) {
    if (!e->is_number() || e->get<double>() < 0.0) return reject("invalid eui_kwh_m2");
    eui = e->get<double>();
  }

  std::vector<Polygon> parts;
  try {
    const std::string type = geom->value("type", "");
    const auto coords = geom->find("coordinates");
    if (coords == geom->end()) return reject("geometry without coordinates");
    if (type == "Polygon") {
      parts.push_back(parse_polygon(*coords));
    } else if (type == "MultiPolygon") {
      if (!coords->is_array() || coords->empty()) return reject("empty MultiPolygon");
      for (const auto& p : *coords) parts.push_back(parse_polygon(p));
    } else {
      return reject("unsupported geometry type '" + type + "'");
    }
  } catch (const DataError& e) {
    return reject(e.what());
  }

  for (std::size_t p = 0; p < parts.size(); ++p) {
    BuildingRecord rec;
    rec.id = parts.size() > 1 ? id + "_" + std::to_string(p) : id;
    rec.footprint = std::move(parts[p]);
    rec.footprint_area_m2 = polygon_area(rec.footprint);
    if (!(rec.footprint_area_m2 > 0.0)) return reject("zero footprint area");
    if (looks_geodetic(bounding_box(rec.footprint))) {
      return reject("coordinates look like lon/lat; planar metres required");
    }
    rec.height_m = height;
    rec.land_use = land_use;
    rec.floor_area_m2 = derive_floor_area(rec.footprint_area_m2, height, options.storey_height_m);
    rec.measured_eui_kwh_m2 = eui;
    out.records.push_back(std::move(rec));
  }
  return out;
}

}  // namespace

double derive_floor_area(double footprint_area_m2, double height_m, double storey_height_m) {
  if (!(footprint_area_m2 > 0.0) || !(height_m > 0.0) || !(storey_height_m > 0.0)) {
    throw DataError("derive_floor_area: inputs must be positive");
  }
  const double storeys = std::max(1.0, std::round(height_m / storey_height_m));
  return footprint_area_m2 * storeys;
}

std::optional<LandUse> parse_land_use(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "residential") return LandUse::Residential;
  if (lower == "other") return LandUse::Other;
  return std::nullopt;
}

std::string_view to_string(LandUse use) {
  return use == LandUse::Residential ? "residential" : "other";
}

InventorySummary summarize(std::span<const BuildingRecord> records) {
  InventorySummary s;
  s.total_count = records.size();
  s.residential_count = static_cast<std::size_t>(std::count_if(
      records.begin(), records.end(), [](const auto& r) { return r.land_use == LandUse::Residential; }));
  s.residential_fraction =
      s.total_count == 0 ? 0.0 : static_cast<double>(s.residential_count) / static_cast<double>(s.total_count);
  return s;
}

namespace {

Inventory parse_all(std::string_view geojson_text, const IngestOptions& options) {
  if (!(options.storey_height_m > 0.0)) throw ConfigError("storey_height_m must be positive");
  json doc;
  try {
    doc = json::parse(geojson_text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("invalid GeoJSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection") {
    throw DataError("GeoJSON root must be a FeatureCollection");
  }
  const auto features_it = doc.find("features");
  if (features_it == doc.end() || !features_it->is_array()) throw DataError("FeatureCollection without features array");
  const json& features = *features_it;

  const auto n = static_cast<long>(features.size());
  std::vector<FeatureResult> results(features.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (long i = 0; i < n; ++i) {
    results[i] = parse_feature(features[i], static_cast<std::size_t>(i), options);
  }

  Inventory inv;
  std::vector<BuildingRecord> all;
  for (auto& r : results) {
    for (auto& note : r.notes) inv.diagnostics.push_back(std::move(note));
    if (r.rejected) ++inv.summary.rejected_count;
    for (auto& rec : r.records) all.push_back(std::move(rec));
  }
  const std::size_t rejected = inv.summary.rejected_count;
  inv.summary = summarize(all);
  inv.summary.rejected_count = rejected;

  inv.records = options.land_use_filter ? filter_land_use(all, *options.land_use_filter) : std::move(all);
  return inv;
}

}  // namespace

Inventory parse_inventory(std::string_view geojson_text, const IngestOptions& options) {
  Inventory inv = parse_all(geojson_text, options);
  if (inv.records.empty()) throw EmptyInventoryError(inv.summary);
  return inv;
}

Inventory load_buildings(const std::filesystem::path& path, const IngestOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open inventory " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  Inventory inv = parse_all(buf.str(), options);
  for (const auto& d : inv.diagnostics) log::warn(d);
  if (inv.records.empty()) throw EmptyInventoryError(inv.summary);
  return inv;
}

std::vector<BuildingRecord> filter_land_use(std::span<const BuildingRecord> records, LandUse keep) {
  std::vector<BuildingRecord> out;
  std::copy_if(records.begin(), records.end(), std::back_inserter(out),
               [keep](const auto& r) { return r.land_use == keep; });
  return out;
}

std::string to_geojson(std::span<const BuildingRecord> records) {
  json features = json::array();
  for (const auto& r : records) {
    json rings = json::array();
    for (const auto& ring : r.footprint.rings) {
      json pts = json::array();
      for (const auto& p : ring) pts.push_back({p.x, p.y});
      rings.push_back(std::move(pts));
    }
    json props = {{"height_m", r.height_m}, {"land_use", std::string(to_string(r.land_use))}};
    if (r.measured_eui_kwh_m2) props["eui_kwh_m2"] = *r.measured_eui_kwh_m2;
    features.push_back({{"type", "Feature"},
                        {"id", r.id},
                        {"properties", std::move(props)},
                        {"geometry", {{"type", "Polygon"}, {"coordinates", std::move(rings)}}}});
  }
  json doc = {{"type", "FeatureCollection"}, {"features", std::move(features)}};
  return doc.dump(1);
}

}  // namespace forge
