// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace autoscale::cli {

/// Locale-independent shortest round-trip text; NaN becomes an empty cell.
std::string csv_number(double value);

std::string csv_row(const std::vector<std::string>& cells);

/// Header plus rows of a simple CSV file (no quoting). Throws ParseError
/// with the line number on ragged rows or quoted cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of `name` in the header; throws ParseError if absent.
  std::size_t column(std::string_view name) const;
};

CsvTable read_csv(std::istream& in, std::string_view source);

/// Parses a numeric cell; empty means NaN. Throws ParseError.
double parse_number(std::string_view cell, std::string_view context);

}  // namespace autoscale::cli
