#include "forge/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "forge/error.hpp"

namespace forge {

std::string encode_pgm(const GrayImage& image, const std::string& comment) {
  std::ostringstream out;
  out << "P5\n";
  if (!comment.empty()) out << "# " << comment << '\n';
  out << image.width << ' ' << image.height << "\n255\n";
  std::string body(image.pixels.size(), '\0');
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    const double v = std::clamp(image.pixels[i], 0.0, 1.0);
    body[i] = static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0)));
  }
  out << body;
  return out.str();
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image, const std::string& comment) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << encode_pgm(image, comment);
}

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::string magic;
  in >> magic;
  if (magic != "P5") throw DataError(path.string() + ": not a binary PGM");
  auto next_int = [&]() {
    while (true) {
      in >> std::ws;
      if (in.peek() == '#') {
        std::string skip;
        std::getline(in, skip);
        continue;
      }
      int v = 0;
      if (!(in >> v)) throw DataError(path.string() + ": malformed PGM header");
      return v;
    }
  };
  GrayImage img;
  img.width = next_int();
  img.height = next_int();
  const int maxval = next_int();
  if (maxval <= 0 || maxval > 255 || img.width <= 0 || img.height <= 0) {
    throw DataError(path.string() + ": unsupported PGM header");
  }
  in.get();
  std::string body(static_cast<std::size_t>(img.width) * img.height, '\0');
  if (!in.read(body.data(), static_cast<std::streamsize>(body.size()))) throw DataError(path.string() + ": truncated PGM");
  img.pixels.resize(body.size());
  for (std::size_t i = 0; i < body.size(); ++i) {
    img.pixels[i] = static_cast<unsigned char>(body[i]) / static_cast<double>(maxval);
  }
  return img;
}

GrayImage tile_sheet(std::span<const std::vector<double>> tiles, int side, int columns) {
  if (tiles.empty() || columns <= 0) throw DataError("tile_sheet: nothing to lay out");
  const int rows = static_cast<int>((tiles.size() + columns - 1) / columns);
  GrayImage sheet{columns * side, rows * side, {}};
  sheet.pixels.assign(static_cast<std::size_t>(sheet.width) * sheet.height, 0.0);
  for (std::size_t t = 0; t < tiles.size(); ++t) {
    if (tiles[t].size() != static_cast<std::size_t>(side) * side) throw DataError("tile_sheet: tile size mismatch");
    const int r0 = static_cast<int>(t / columns) * side;
    const int c0 = static_cast<int>(t % columns) * side;
    for (int r = 0; r < side; ++r) {
      std::copy_n(tiles[t].begin() + static_cast<std::ptrdiff_t>(r) * side, side,
                  sheet.pixels.begin() + static_cast<std::ptrdiff_t>(r0 + r) * sheet.width + c0);
    }
  }
  return sheet;
}

}  // namespace forge
