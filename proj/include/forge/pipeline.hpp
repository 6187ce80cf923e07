#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "forge/cluster.hpp"
#include "forge/geo_ingest.hpp"
#include "forge/raster.hpp"
#include "forge/vqae.hpp"

namespace forge {

struct PipelineConfig {
  std::filesystem::path base_dir;  // relative paths resolve against this
  std::string inventory;
  std::optional<LandUse> land_use_filter = LandUse::Residential;
  double storey_height_m = kDefaultStoreyHeightM;
  std::string zone = "district";

  std::string baseline_eui;
  std::string sampled_eui;   // empty: derive from measured EUIs
  std::string averaged_eui;  // empty: derive from measured EUIs
  std::string actuals;       // empty: aggregate measured EUIs
  std::string energy_bypass; // zone totals CSV; skips aggregation entirely

  std::string out_dir = "out";

  GridSpec grid;
  VqConfig vq;
  double test_fraction = 0.1;
  std::uint64_t seed = 0;

  int k_min = 1;
  int k_max = 8;
  std::optional<int> fixed_k;
  int restarts = 5;
  int max_iter = 100;
  double tol = 1e-9;
  bool cluster_quantized = true;  // false clusters pre-quantization latents

  int sheet_samples = 8;

  std::filesystem::path resolve(const std::string& p) const;
  std::filesystem::path out() const { return resolve(out_dir); }
};

/// Parses a JSON config; errors name the offending field or line.
PipelineConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& path);

/// Canonical JSON of the effective configuration (output directory excluded).
std::string canonical_config(const PipelineConfig& config);
/// 16 hex digits of FNV-1a over canonical_config.
std::string config_hash(const PipelineConfig& config);

/// Per-stage seeds derived from the global seed.
std::uint64_t stage_seed(const PipelineConfig& config, std::string_view stage);

void run_ingest(const PipelineConfig& config);
void run_rasterize(const PipelineConfig& config);
void run_train(const PipelineConfig& config);
void run_cluster(const PipelineConfig& config);
void run_archetypes(const PipelineConfig& config);
void run_energy(const PipelineConfig& config);
void run_all(const PipelineConfig& config);

/// Dispatches a subcommand name to its stage.
void run_stage(std::string_view subcommand, const PipelineConfig& config);

struct SheetSummary {
  std::vector<std::string> ids;
  std::vector<double> pair_mse;
  double mean_mse = 0.0;
  int rows = 0;
  int columns = 0;
};

/// Originals on the first row, reconstructions on the second. Writes the
/// sheet as PGM plus a JSON sidecar with per-pair and mean MSE.
SheetSummary emit_reconstruction_sheet(const VqModel& model, std::span<const Heightmap> samples,
                                       const std::filesystem::path& pgm_path, const std::filesystem::path& json_path,
                                       const std::string& config_hash = {});

/// SVG scatter of 2D points coloured by cluster; `marked` points get a ring.
std::string scatter_svg(std::span<const double> xy, std::span<const int> labels, std::span<const std::size_t> marked,
                        const std::string& caption, const std::string& config_hash = {});

}  // namespace forge
