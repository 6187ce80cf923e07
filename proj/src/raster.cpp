#include "forge/raster.hpp"

#include <algorithm>
#include <cmath>

#include "forge/rng.hpp"

namespace forge {

void validate(const GridSpec& spec) {
  const int w = spec.width_px;
  if (spec.width_px != spec.height_px) throw ConfigError("grid must be square");
  if (w < 16 || (w & (w - 1)) != 0) throw ConfigError("grid side must be a power of two >= 16");
  if (!(spec.meters_per_px > 0.0)) throw ConfigError("meters_per_px must be positive");
}

double height_to_intensity(double height_m) { return std::clamp(height_m, 0.0, kMaxHeightM) / kMaxHeightM; }

Heightmap rasterize(const BuildingRecord& record, const GridSpec& spec) {
  validate(spec);
  if (record.footprint.rings.empty() || !(polygon_area(record.footprint) > 0.0)) {
    throw DataError("degenerate footprint for building " + record.id);
  }
  const BBox box = bounding_box(record.footprint);
  if (box.width() > spec.window_width_m() || box.height() > spec.window_height_m()) {
    throw DataError("window overflow: building " + record.id + " exceeds the raster window");
  }
  const Point center = box.center();
  const int side = spec.width_px;
  const double value = height_to_intensity(record.height_m);

  Heightmap map{record.id, side, std::vector<double>(static_cast<std::size_t>(side) * side, 0.0)};
  const double left = center.x - side * 0.5 * spec.meters_per_px;

  std::vector<double> crossings;
  for (int row = 0; row < side; ++row) {
    const double y = spec.sample_point(center, row, 0).y;
    crossings.clear();
    for (const auto& ring : record.footprint.rings) {
      for (std::size_t k = 0; k + 1 < ring.size(); ++k) {
        const Point& a = ring[k + 1];
        const Point& b = ring[k];
        if ((a.y > y) != (b.y > y)) {
          crossings.push_back((b.x - a.x) * (y - a.y) / (b.y - a.y) + a.x);
        }
      }
    }
    std::sort(crossings.begin(), crossings.end());
    // Inside iff an odd number of crossings lie strictly right of the sample.
    for (std::size_t p = 0; p + 1 < crossings.size(); p += 2) {
      const double enter = crossings[p];
      const double leave = crossings[p + 1];
      int col = static_cast<int>(std::ceil((enter - left) / spec.meters_per_px - 0.5));
      col = std::clamp(col, 0, side);
      while (col > 0 && spec.sample_point(center, row, col - 1).x >= enter) --col;
      while (col < side && spec.sample_point(center, row, col).x < enter) ++col;
      for (; col < side && spec.sample_point(center, row, col).x < leave; ++col) {
        map.pixels[static_cast<std::size_t>(row) * side + col] = value;
      }
    }
  }
  return map;
}

RasterBatch rasterize_all(std::span<const BuildingRecord> records, const GridSpec& spec, Exec exec) {
  validate(spec);
  const auto n = static_cast<long>(records.size());
  std::vector<std::optional<Heightmap>> maps(records.size());
  std::vector<std::string> errors(records.size());

  auto one = [&](long i) {
    try {
      maps[i] = rasterize(records[i], spec);
    } catch (const DataError& e) {
      errors[i] = e.what();
    }
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 8)
    for (long i = 0; i < n; ++i) one(i);
  } else {
    for (long i = 0; i < n; ++i) one(i);
  }

  RasterBatch out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (maps[i]) {
      out.maps.push_back(std::move(*maps[i]));
      out.source_index.push_back(i);
    } else {
      out.diagnostics.push_back("skipped " + records[i].id + ": " + errors[i]);
    }
  }
  return out;
}

Dataset build_dataset(std::span<const BuildingRecord> records, const GridSpec& spec, double test_fraction,
                      std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ConfigError("test_fraction must lie in (0, 1)");
  RasterBatch batch = rasterize_all(records, spec);
  const std::size_t n = batch.maps.size();
  if (n < 2) throw DataError("need at least 2 rasterizable records, got " + std::to_string(n));

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(std::span(order));

  auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  n_test = std::clamp<std::size_t>(n_test, 1, n - 1);

  Dataset ds;
  ds.diagnostics = std::move(batch.diagnostics);
  for (std::size_t i = 0; i < n; ++i) {
    auto& dst = i < n_test ? ds.test : ds.train;
    dst.push_back(std::move(batch.maps[order[i]]));
  }
  return ds;
}

}  // namespace forge
