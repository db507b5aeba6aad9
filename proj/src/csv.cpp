#include "buggin/csv.hpp"

#include "buggin/error.hpp"

namespace buggin::csv {

std::vector<ParsedRow> parse(std::string_view text) {
  std::vector<ParsedRow> rows;
  ParsedRow current;
  std::string field;
  std::size_t line = 1;
  current.line = line;
  bool in_quotes = false;
  bool field_started = false;  // distinguishes "" from an absent record
  bool row_has_content = false;

  auto end_field = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    if (row_has_content || !current.fields.empty()) {
      end_field();
      rows.push_back(std::move(current));
    }
    current = ParsedRow{};
    row_has_content = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started && !field.empty()) {
          throw ParseError("line " + std::to_string(line) + ": stray quote inside unquoted field");
        }
        in_quotes = true;
        field_started = true;
        row_has_content = true;
        break;
      case ',':
        row_has_content = true;
        end_field();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        [[fallthrough]];
      case '\n':
        end_row();
        ++line;
        current.line = line;
        break;
      default:
        field.push_back(c);
        field_started = true;
        row_has_content = true;
    }
  }
  if (in_quotes) throw ParseError("line " + std::to_string(current.line) + ": unterminated quoted field");
  end_row();
  return rows;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_row(const Row& row) {
  std::string out;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out.push_back(',');
    out += escape(row[i]);
  }
  out += "\r\n";
  return out;
}

}  // namespace buggin::csv
