#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cxrseg::csv {

/// A parsed CSV document: header plus data rows. Quoted fields follow RFC 4180.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  /// 1-based line number of each data row in the source text.
  std::vector<std::size_t> line_numbers;

  std::optional<std::size_t> column(std::string_view name) const;
};

/// Parses `text`. Blank lines are skipped. Throws FormatError on unterminated quotes
/// or rows whose field count differs from the header.
Table parse(std::string_view text);

std::string trim(std::string_view s);

/// Quotes a field when it contains a delimiter, quote, or newline.
std::string escape(std::string_view field);

std::string join_row(const std::vector<std::string>& fields);

}  // namespace cxrseg::csv
