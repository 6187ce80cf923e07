#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace forge {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by name; throws DataError naming the file if absent.
  std::size_t column(std::string_view name) const;
  std::string source;
};

/// Plain comma-separated text without quoting. Lines starting with '#' and
/// blank lines are skipped; the first remaining line is the header.
CsvTable parse_csv(std::string_view text, std::string source = "<csv>");
CsvTable read_csv(const std::filesystem::path& path);

double parse_number(std::string_view field, std::string_view what);

/// Shortest decimal form that round-trips.
std::string format_double(double v);

void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

}  // namespace forge
