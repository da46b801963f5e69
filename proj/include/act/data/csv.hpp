#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace act::csv {

// Comma-separated table with a header row. No quoting: the file formats used
// here never contain commas inside fields.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Throws DataError naming the file when the column is absent.
  std::size_t column(std::string_view name) const;
  std::string source;
};

Table parse(std::string_view text, std::string source = "<memory>");
Table read(const std::filesystem::path& path);

// Throws DataError with the source/row context on malformed input.
double parse_double(std::string_view field, std::string_view context);
bool is_iso_date(std::string_view field);

// Shortest text that parses back to the same double, in plain decimal unless
// the magnitude is below 1e-12 or at least 1e15.
std::string format_double(double value);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view content);

}  // namespace act::csv
