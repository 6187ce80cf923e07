#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "forge/error.hpp"
#include "forge/geometry.hpp"

namespace forge {

enum class LandUse { Residential, Other };

inline constexpr double kMaxHeightM = 100.0;
inline constexpr double kDefaultStoreyHeightM = 3.0;

struct BuildingRecord {
  std::string id;
  Polygon footprint;
  double height_m = 0.0;
  LandUse land_use = LandUse::Other;
  double footprint_area_m2 = 0.0;
  double floor_area_m2 = 0.0;
  std::optional<double> measured_eui_kwh_m2;
};

struct InventorySummary {
  std::size_t total_count = 0;
  std::size_t residential_count = 0;
  double residential_fraction = 0.0;
  std::size_t rejected_count = 0;
};

struct IngestOptions {
  std::optional<LandUse> land_use_filter;
  double storey_height_m = kDefaultStoreyHeightM;
};

struct Inventory {
  std::vector<BuildingRecord> records;
  InventorySummary summary;
  /// One line per rejected feature or clamped height, in file order.
  std::vector<std::string> diagnostics;
};

/// Thrown when nothing survives validation and filtering. Carries the
/// summary so callers can still report the 0/N counts.
class EmptyInventoryError : public DataError {
 public:
  explicit EmptyInventoryError(InventorySummary s)
      : DataError("empty inventory"), summary_(s) {}
  const InventorySummary& summary() const noexcept { return summary_; }

 private:
  InventorySummary summary_;
};

/// footprint × max(1, round(height / storey)).
double derive_floor_area(double footprint_area_m2, double height_m,
                         double storey_height_m = kDefaultStoreyHeightM);

std::optional<LandUse> parse_land_use(std::string_view text);
std::string_view to_string(LandUse use);

/// Parses a GeoJSON FeatureCollection. Invalid features are dropped with a
/// diagnostic; an empty result throws EmptyInventoryError. Features are
/// parsed in parallel but records keep file order.
Inventory parse_inventory(std::string_view geojson_text, const IngestOptions& options = {});

/// parse_inventory on a file; diagnostics are also echoed to stderr.
Inventory load_buildings(const std::filesystem::path& path, const IngestOptions& options = {});

std::vector<BuildingRecord> filter_land_use(std::span<const BuildingRecord> records, LandUse keep);

/// Serializes records as a FeatureCollection that parse_inventory reads back
/// to the same records.
std::string to_geojson(std::span<const BuildingRecord> records);

InventorySummary summarize(std::span<const BuildingRecord> records);

}  // namespace forge
