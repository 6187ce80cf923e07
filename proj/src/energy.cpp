#include "forge/energy.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "forge/csv.hpp"
#include "json.hpp"

namespace forge {

EuiTable::EuiTable(std::vector<EuiRecord> rows) : rows_(std::move(rows)) {
  std::set<std::string> seen;
  for (const auto& r : rows_) {
    if (!seen.insert(r.archetype_id).second) throw DataError("duplicate archetype id '" + r.archetype_id + "' in EUI table");
    if (!(r.eui_kwh_per_m2 >= 0.0) || !std::isfinite(r.eui_kwh_per_m2)) {
      throw DataError("EUI for '" + r.archetype_id + "' must be a finite value >= 0");
    }
  }
}

std::optional<double> EuiTable::find(std::string_view id) const {
  for (const auto& r : rows_) {
    if (r.archetype_id == id) return r.eui_kwh_per_m2;
  }
  return std::nullopt;
}

EuiTable read_eui_table(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  const auto id = t.column("archetype_id");
  const auto eui = t.column("eui_kwh_per_m2");
  const auto cond = t.column("conditioned");
  std::vector<EuiRecord> rows;
  for (const auto& r : t.rows) {
    const std::string& c = r[cond];
    if (c != "true" && c != "false" && c != "1" && c != "0") throw DataError(path.string() + ": conditioned must be true/false");
    rows.push_back({r[id], parse_number(r[eui], "eui_kwh_per_m2"), c == "true" || c == "1"});
  }
  return EuiTable(std::move(rows));
}

std::string eui_table_csv(const EuiTable& table) {
  std::ostringstream out;
  out << "archetype_id,eui_kwh_per_m2,conditioned\n";
  for (const auto& r : table.rows()) {
    out << r.archetype_id << ',' << format_double(r.eui_kwh_per_m2) << ',' << (r.conditioned ? "true" : "false") << '\n';
  }
  return out.str();
}

std::string archetype_id(int cluster) { return "cluster_" + std::to_string(cluster); }

double aggregate_total(std::span<const BuildingRecord> records, std::span<const int> labels, const EuiTable& table) {
  if (records.size() != labels.size()) throw DataError("records and cluster labels differ in length");
  std::map<int, double> eui_of;
  double total = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto it = eui_of.find(labels[i]);
    if (it == eui_of.end()) {
      const auto eui = table.find(archetype_id(labels[i]));
      if (!eui) throw DataError("no EUI for cluster " + std::to_string(labels[i]) + " (" + archetype_id(labels[i]) + ")");
      it = eui_of.emplace(labels[i], *eui).first;
    }
    total += records[i].floor_area_m2 * it->second;
  }
  return total;
}

double aggregate_baseline(std::span<const BuildingRecord> records, const EuiTable& table) {
  const auto eui = table.find(kBaselineArchetype);
  if (!eui) throw DataError("baseline EUI table has no PBM row");
  double total = 0.0;
  for (const auto& r : records) total += r.floor_area_m2 * *eui;
  return total;
}

double aggregate_measured(std::span<const BuildingRecord> records) {
  double total = 0.0;
  for (const auto& r : records) {
    if (!r.measured_eui_kwh_m2) throw DataError("building " + r.id + " has no measured EUI");
    total += r.floor_area_m2 * *r.measured_eui_kwh_m2;
  }
  return total;
}

double accuracy(double estimated_kwh, double actual_kwh) {
  if (!(actual_kwh > 0.0)) throw DataError("accuracy: actual consumption must be positive");
  return 1.0 - std::abs(estimated_kwh - actual_kwh) / actual_kwh;
}

double implied_baseline_eui(double actual_total_kwh, double actual_mean_eui, double baseline_accuracy) {
  if (!(actual_total_kwh > 0.0) || !(actual_mean_eui > 0.0) || !(baseline_accuracy > 0.0)) {
    throw DataError("implied_baseline_eui: inputs must be positive");
  }
  return actual_mean_eui * baseline_accuracy;
}

EnergyReport compare_report(std::span<const ZoneTotals> zones) {
  EnergyReport report;
  if (zones.empty()) return report;
  ReportAverage& avg = report.average;
  for (const auto& z : zones) {
    ZoneEstimate e{z.zone, z.actual_kwh, z.baseline_kwh, z.sampled_kwh, z.averaged_kwh};
    e.baseline_accuracy = accuracy(z.baseline_kwh, z.actual_kwh);
    e.sampled_accuracy = accuracy(z.sampled_kwh, z.actual_kwh);
    e.averaged_accuracy = accuracy(z.averaged_kwh, z.actual_kwh);
    e.sampled_improvement_pp = 100.0 * (e.sampled_accuracy - e.baseline_accuracy);
    e.averaged_improvement_pp = 100.0 * (e.averaged_accuracy - e.baseline_accuracy);
    avg.baseline_accuracy += e.baseline_accuracy;
    avg.sampled_accuracy += e.sampled_accuracy;
    avg.averaged_accuracy += e.averaged_accuracy;
    avg.sampled_improvement_pp += e.sampled_improvement_pp;
    avg.averaged_improvement_pp += e.averaged_improvement_pp;
    report.zones.push_back(std::move(e));
  }
  const double n = static_cast<double>(zones.size());
  avg.baseline_accuracy /= n;
  avg.sampled_accuracy /= n;
  avg.averaged_accuracy /= n;
  avg.sampled_improvement_pp /= n;
  avg.averaged_improvement_pp /= n;
  avg.method_accuracy = 0.5 * (avg.sampled_accuracy + avg.averaged_accuracy);
  avg.method_improvement_pp = 0.5 * (avg.sampled_improvement_pp + avg.averaged_improvement_pp);
  return report;
}

EnergyReport compare_report(std::span<const ZoneInput> zones) {
  std::vector<ZoneTotals> totals;
  for (const auto& z : zones) {
    if (!z.baseline || !z.sampled || !z.averaged) throw DataError("zone " + z.zone + " is missing an EUI table");
    totals.push_back({z.zone, z.actual_kwh, aggregate_baseline(z.records, *z.baseline),
                      aggregate_total(z.records, z.labels, *z.sampled), aggregate_total(z.records, z.labels, *z.averaged)});
  }
  return compare_report(totals);
}

std::vector<ZoneTotals> read_zone_totals(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  const auto zone = t.column("zone"), actual = t.column("actual_kwh"), base = t.column("baseline_kwh"),
             sampled = t.column("sampled_kwh"), averaged = t.column("averaged_kwh");
  std::vector<ZoneTotals> out;
  for (const auto& r : t.rows) {
    out.push_back({r[zone], parse_number(r[actual], "actual_kwh"), parse_number(r[base], "baseline_kwh"),
                   parse_number(r[sampled], "sampled_kwh"), parse_number(r[averaged], "averaged_kwh")});
  }
  return out;
}

std::map<std::string, double> read_zone_actuals(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  const auto zone = t.column("zone"), actual = t.column("actual_kwh");
  std::map<std::string, double> out;
  for (const auto& r : t.rows) out[r[zone]] = parse_number(r[actual], "actual_kwh");
  return out;
}

namespace {

std::string pct(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * fraction);
  return buf;
}

std::string pp(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

}  // namespace

std::string report_csv(const EnergyReport& report, const std::string& config_hash) {
  std::ostringstream out;
  if (!config_hash.empty()) out << "# config_hash=" << config_hash << '\n';
  out << "zone,actual_kwh,baseline_kwh,baseline_accuracy_pct,method,method_kwh,method_accuracy_pct,improvement_pp\n";
  for (const auto& z : report.zones) {
    out << z.zone << ',' << sci(z.actual_kwh) << ',' << sci(z.baseline_kwh) << ',' << pct(z.baseline_accuracy)
        << ",sample," << sci(z.sampled_kwh) << ',' << pct(z.sampled_accuracy) << ',' << pp(z.sampled_improvement_pp)
        << '\n';
    out << z.zone << ',' << sci(z.actual_kwh) << ',' << sci(z.baseline_kwh) << ',' << pct(z.baseline_accuracy)
        << ",average," << sci(z.averaged_kwh) << ',' << pct(z.averaged_accuracy) << ','
        << pp(z.averaged_improvement_pp) << '\n';
  }
  const auto& a = report.average;
  out << "average,,," << pct(a.baseline_accuracy) << ",average,," << pct(a.method_accuracy) << ','
      << pp(a.method_improvement_pp) << '\n';
  return out.str();
}

std::string report_json(const EnergyReport& report, const std::string& config_hash) {
  nlohmann::json zones = nlohmann::json::array();
  for (const auto& z : report.zones) {
    zones.push_back({{"zone", z.zone},
                     {"actual_kwh", z.actual_kwh},
                     {"baseline_kwh", z.baseline_kwh},
                     {"sampled_kwh", z.sampled_kwh},
                     {"averaged_kwh", z.averaged_kwh},
                     {"baseline_accuracy", z.baseline_accuracy},
                     {"sampled_accuracy", z.sampled_accuracy},
                     {"averaged_accuracy", z.averaged_accuracy},
                     {"sampled_improvement_pp", z.sampled_improvement_pp},
                     {"averaged_improvement_pp", z.averaged_improvement_pp}});
  }
  const auto& a = report.average;
  nlohmann::json doc = {{"zones", zones},
                        {"average",
                         {{"baseline_accuracy", a.baseline_accuracy},
                          {"sampled_accuracy", a.sampled_accuracy},
                          {"averaged_accuracy", a.averaged_accuracy},
                          {"method_accuracy", a.method_accuracy},
                          {"sampled_improvement_pp", a.sampled_improvement_pp},
                          {"averaged_improvement_pp", a.averaged_improvement_pp},
                          {"method_improvement_pp", a.method_improvement_pp}}}};
  if (!config_hash.empty()) doc["config_hash"] = config_hash;
  return doc.dump(2) + "\n";
}

}  // namespace forge
