#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "forge/geo_ingest.hpp"

namespace forge {

enum class Family { Bar = 0, LShape = 1, UShape = 2, Tower = 3 };

inline constexpr std::array<const char*, 4> kFamilyNames = {"bar", "l_shape", "u_shape", "tower"};
/// Nominal EUI per family, kWh/m².
inline constexpr std::array<double, 4> kFamilyEui = {95.0, 110.0, 125.0, 140.0};

struct SyntheticOptions {
  int per_family = 100;
  int non_residential = 40;
  double eui_jitter = 0.05;  // relative, uniform
  std::uint64_t seed = 2024;
};

struct SyntheticDistrict {
  std::vector<BuildingRecord> records;  // residential and other, shuffled
  std::vector<int> family;              // per record; -1 for non-residential
  double baseline_eui = 0.0;            // flat EUI biased low
};

/// Axis-aligned bar, L, U and tower footprints with family-specific height
/// ranges, laid out on a planar grid in metres.
SyntheticDistrict make_synthetic_district(const SyntheticOptions& options = {});

/// Writes inventory.geojson, pbm_eui.csv, families.csv and config.json into
/// `dir`. The config points at the other files with relative paths.
void write_synthetic_bundle(const std::filesystem::path& dir, const SyntheticOptions& options = {}, int epochs = 15);

}  // namespace forge
