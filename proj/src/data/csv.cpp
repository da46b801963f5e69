#include "act/data/csv.hpp"

#include <charconv>
#include <cmath>
#include <chrono>
#include <fstream>
#include <sstream>

#include "act/error.hpp"

namespace act::csv {

namespace {

std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.emplace_back(line.substr(start));
      break;
    }
    fields.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

}  // namespace

std::size_t Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw DataError(source + ": missing column '" + std::string(name) + "'");
}

Table parse(std::string_view text, std::string source) {
  Table table;
  table.source = std::move(source);
  bool have_header = false;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!have_header) {
      table.header = split_line(line);
      have_header = true;
      continue;
    }
    auto fields = split_line(line);
    if (fields.size() != table.header.size()) {
      throw DataError(table.source + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(table.header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  if (!have_header) throw DataError(table.source + ": empty file");
  return table;
}

Table read(const std::filesystem::path& path) { return parse(read_text(path), path.string()); }

double parse_double(std::string_view field, std::string_view context) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (field.empty() || ec != std::errc() || ptr != last) {
    throw DataError(std::string(context) + ": cannot parse number '" + std::string(field) + "'");
  }
  return value;
}

bool is_iso_date(std::string_view field) {
  if (field.size() != 10 || field[4] != '-' || field[7] != '-') return false;
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  if (std::from_chars(field.data(), field.data() + 4, y).ptr != field.data() + 4) return false;
  if (std::from_chars(field.data() + 5, field.data() + 7, m).ptr != field.data() + 7) return false;
  if (std::from_chars(field.data() + 8, field.data() + 10, d).ptr != field.data() + 10) return false;
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                        std::chrono::day{d}};
  return ymd.ok();
}

std::string format_double(double value) {
  // Plain decimals for everything a market file holds; exponents only at the extremes.
  char buf[400];
  const double mag = std::fabs(value);
  const bool plain = mag == 0.0 || (mag >= 1e-12 && mag < 1e15);
  const auto [ptr, ec] = plain ? std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed)
                               : std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw DataError("format_double failed");
  return std::string(buf, ptr);
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace act::csv
