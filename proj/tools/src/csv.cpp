// SPDX-License-Identifier: Apache-2.0
#include "autoscale_cli/csv.hpp"

#include <charconv>
#include <cmath>
#include <limits>

#include "autoscale/error.hpp"
#include "autoscale_cli/trace.hpp"

namespace autoscale::cli {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

}  // namespace

std::string csv_number(double value) {
  if (std::isnan(value)) return {};
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return format_double(value);
}

std::string csv_row(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) out += ',';
    out += cells[i];
  }
  out += '\n';
  return out;
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw ParseError("CSV column '" + std::string(name) + "' not found");
}

CsvTable read_csv(std::istream& in, std::string_view source) {
  CsvTable table;
  std::string line;
  std::size_t number = 0;
  const auto where = [&] { return std::string(source) + ":" + std::to_string(number) + ": "; };
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    if (line.find('"') != std::string::npos) throw ParseError(where() + "quoted cells are not supported");
    auto cells = split(line);
    if (table.header.empty()) {
      table.header = std::move(cells);
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw ParseError(where() + "expected " + std::to_string(table.header.size()) + " cells, found " +
                       std::to_string(cells.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  if (table.header.empty()) throw ParseError(std::string(source) + ": empty CSV file");
  return table;
}

double parse_number(std::string_view cell, std::string_view context) {
  if (cell.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (cell == "inf") return std::numeric_limits<double>::infinity();
  if (cell == "-inf") return -std::numeric_limits<double>::infinity();
  double value = 0.0;
  const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || end != cell.data() + cell.size()) {
    throw ParseError(std::string(context) + ": '" + std::string(cell) + "' is not a number");
  }
  return value;
}

}  // namespace autoscale::cli
