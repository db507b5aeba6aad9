#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace buggin::csv {

using Row = std::vector<std::string>;

// Parses RFC 4180 CSV: quoted fields may contain commas, CRLF/LF and doubled
// quotes. Each row carries the line it starts on.
struct ParsedRow {
  Row fields;
  std::size_t line = 0;  // 1-based line where the record starts
};

std::vector<ParsedRow> parse(std::string_view text);

// Quotes a field when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);

std::string format_row(const Row& row);

}  // namespace buggin::csv
