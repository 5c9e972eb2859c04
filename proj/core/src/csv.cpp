#include "cxrseg/csv.hpp"

#include "cxrseg/error.hpp"

namespace cxrseg::csv {

std::optional<std::size_t> Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

std::string trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

namespace {

// Splits one logical record starting at `pos`; advances `pos` past the record's newline.
std::vector<std::string> read_record(std::string_view text, std::size_t& pos, std::size_t& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool field_was_quoted = false;
  const std::size_t start_line = line;
  while (pos < text.size()) {
    const char c = text[pos];
    if (quoted) {
      if (c == '"') {
        if (pos + 1 < text.size() && text[pos + 1] == '"') {
          field.push_back('"');
          pos += 2;
          continue;
        }
        quoted = false;
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      ++pos;
      continue;
    }
    if (c == '"' && field.empty() && !field_was_quoted) {
      quoted = true;
      field_was_quoted = true;
      ++pos;
    } else if (c == ',') {
      fields.push_back(field_was_quoted ? field : trim(field));
      field.clear();
      field_was_quoted = false;
      ++pos;
    } else if (c == '\n') {
      ++pos;
      ++line;
      break;
    } else if (field_was_quoted && (c == ' ' || c == '\t' || c == '\r')) {
      ++pos;  // padding after a closing quote, including CRLF endings
    } else {
      field.push_back(c);
      ++pos;
    }
  }
  if (quoted) {
    throw FormatError("unterminated quoted field starting on line " + std::to_string(start_line));
  }
  fields.push_back(field_was_quoted ? field : trim(field));
  return fields;
}

bool blank(const std::vector<std::string>& r) { return r.size() == 1 && r[0].empty(); }

}  // namespace

Table parse(std::string_view text) {
  Table table;
  std::size_t pos = 0;
  std::size_t line = 1;
  // Byte-order mark from spreadsheet exports.
  if (text.substr(0, 3) == "\xEF\xBB\xBF") pos = 3;
  bool have_header = false;
  while (pos < text.size()) {
    const std::size_t row_line = line;
    auto record = read_record(text, pos, line);
    if (blank(record)) continue;
    if (!have_header) {
      table.header = std::move(record);
      have_header = true;
      continue;
    }
    if (record.size() != table.header.size()) {
      throw FormatError("line " + std::to_string(row_line) + ": expected " +
                        std::to_string(table.header.size()) + " fields, found " +
                        std::to_string(record.size()));
    }
    table.rows.push_back(std::move(record));
    table.line_numbers.push_back(row_line);
  }
  if (!have_header) throw FormatError("empty CSV document");
  return table;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string join_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += escape(fields[i]);
  }
  return out;
}

}  // namespace cxrseg::csv
