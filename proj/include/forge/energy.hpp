#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "forge/geo_ingest.hpp"

namespace forge {

inline constexpr std::string_view kBaselineArchetype = "PBM";

struct EuiRecord {
  std::string archetype_id;
  double eui_kwh_per_m2 = 0.0;
  bool conditioned = false;
};

/// EUI rows keyed by archetype id; ids unique, values >= 0.
class EuiTable {
 public:
  EuiTable() = default;
  explicit EuiTable(std::vector<EuiRecord> rows);

  std::optional<double> find(std::string_view archetype_id) const;
  const std::vector<EuiRecord>& rows() const { return rows_; }

 private:
  std::vector<EuiRecord> rows_;
};

/// CSV columns: archetype_id,eui_kwh_per_m2,conditioned
EuiTable read_eui_table(const std::filesystem::path& path);
std::string eui_table_csv(const EuiTable& table);

/// Archetype id of a cluster label in EUI tables.
std::string archetype_id(int cluster);

/// Σ floor_area × EUI of the building's cluster archetype.
double aggregate_total(std::span<const BuildingRecord> records, std::span<const int> labels, const EuiTable& table);

/// Every building at the single PBM EUI.
double aggregate_baseline(std::span<const BuildingRecord> records, const EuiTable& table);

/// Σ floor_area × measured EUI; every record must carry a measurement.
double aggregate_measured(std::span<const BuildingRecord> records);

/// 1 - |estimated - actual| / actual.
double accuracy(double estimated_kwh, double actual_kwh);

/// actual_mean_eui × baseline_accuracy: the flat EUI that underestimates by
/// the given accuracy.
double implied_baseline_eui(double actual_total_kwh, double actual_mean_eui, double baseline_accuracy);

struct ZoneTotals {
  std::string zone;
  double actual_kwh = 0.0;
  double baseline_kwh = 0.0;
  double sampled_kwh = 0.0;
  double averaged_kwh = 0.0;
};

struct ZoneEstimate {
  std::string zone;
  double actual_kwh = 0.0;
  double baseline_kwh = 0.0;
  double sampled_kwh = 0.0;
  double averaged_kwh = 0.0;
  double baseline_accuracy = 0.0;
  double sampled_accuracy = 0.0;
  double averaged_accuracy = 0.0;
  double sampled_improvement_pp = 0.0;   // percentage points over baseline
  double averaged_improvement_pp = 0.0;
};

/// Means across zones; the method means pool sampled and averaged rows.
struct ReportAverage {
  double baseline_accuracy = 0.0;
  double sampled_accuracy = 0.0;
  double averaged_accuracy = 0.0;
  double method_accuracy = 0.0;
  double sampled_improvement_pp = 0.0;
  double averaged_improvement_pp = 0.0;
  double method_improvement_pp = 0.0;
};

struct EnergyReport {
  std::vector<ZoneEstimate> zones;
  ReportAverage average;
};

struct ZoneInput {
  std::string zone;
  std::span<const BuildingRecord> records;
  std::span<const int> labels;
  const EuiTable* baseline = nullptr;
  const EuiTable* sampled = nullptr;
  const EuiTable* averaged = nullptr;
  double actual_kwh = 0.0;
};

EnergyReport compare_report(std::span<const ZoneTotals> zones);
EnergyReport compare_report(std::span<const ZoneInput> zones);

/// CSV columns: zone,actual_kwh,baseline_kwh,sampled_kwh,averaged_kwh
std::vector<ZoneTotals> read_zone_totals(const std::filesystem::path& path);
/// CSV columns: zone,actual_kwh
std::map<std::string, double> read_zone_actuals(const std::filesystem::path& path);

/// Two method rows per zone and a closing average row.
std::string report_csv(const EnergyReport& report, const std::string& config_hash = {});
std::string report_json(const EnergyReport& report, const std::string& config_hash = {});

}  // namespace forge
