#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace forge {

/// Grayscale raster with intensities in [0, 1], row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;
};

/// Binary PGM (P5, maxval 255); each intensity maps to round(v × 255).
/// The optional comment lands in the header as `# <comment>`.
void write_pgm(const std::filesystem::path& path, const GrayImage& image, const std::string& comment = {});
std::string encode_pgm(const GrayImage& image, const std::string& comment = {});
GrayImage read_pgm(const std::filesystem::path& path);

/// Lays equally sized square tiles out left-to-right, top-to-bottom.
GrayImage tile_sheet(std::span<const std::vector<double>> tiles, int side, int columns);

}  // namespace forge
