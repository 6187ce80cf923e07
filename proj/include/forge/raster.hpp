#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "forge/exec.hpp"
#include "forge/geo_ingest.hpp"

namespace forge {

struct GridSpec {
  int width_px = 64;
  int height_px = 64;
  double meters_per_px = 2.0;

  double window_width_m() const { return width_px * meters_per_px; }
  double window_height_m() const { return height_px * meters_per_px; }

  /// World coordinate of the centre of pixel (row, col) when the window is
  /// centred on `center`. Row 0 is the top (largest y).
  Point sample_point(Point center, int row, int col) const {
    return {center.x + (col + 0.5 - width_px * 0.5) * meters_per_px,
            center.y + (height_px * 0.5 - row - 0.5) * meters_per_px};
  }
};

/// Throws ConfigError unless the grid is square, a power of two >= 16, with
/// positive pixel size.
void validate(const GridSpec& spec);

/// Row-major grayscale grid, intensities in [0, 1].
struct Heightmap {
  std::string building_id;
  int side = 0;
  std::vector<double> pixels;

  double at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * side + col]; }
};

double height_to_intensity(double height_m);

/// Scanline fill of the footprint centred on the grid. A pixel is inside when
/// its centre is inside under the even-odd rule; inside pixels carry
/// height/100.
Heightmap rasterize(const BuildingRecord& record, const GridSpec& spec);

struct RasterBatch {
  std::vector<Heightmap> maps;                // rasterizable records, input order
  std::vector<std::size_t> source_index;      // index into the input for each map
  std::vector<std::string> diagnostics;       // one line per skipped record
};

RasterBatch rasterize_all(std::span<const BuildingRecord> records, const GridSpec& spec,
                          Exec exec = Exec::Parallel);

struct Dataset {
  std::vector<Heightmap> train;
  std::vector<Heightmap> test;
  std::vector<std::string> diagnostics;
};

/// Seeded shuffle then split; |test| = max(1, round(fraction × N)).
Dataset build_dataset(std::span<const BuildingRecord> records, const GridSpec& spec,
                      double test_fraction, std::uint64_t seed);

}  // namespace forge
