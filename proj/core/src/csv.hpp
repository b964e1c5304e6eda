#pragma once

// Internal CSV reader/writer helpers. Comma-separated, UTF-8, first row is
// the header; quoted fields may contain commas, doubled quotes and newlines.

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace facet::csv {

struct Row {
  std::vector<std::string> fields;
  std::size_t line = 0;  // 1-based line number of the row's first character
};

struct Table {
  std::vector<std::string> header;
  std::vector<Row> rows;
};

Table parse(std::string_view text, std::string_view origin);
Table read_file(const std::filesystem::path& path);

/// Quotes a field when it contains a separator, quote or newline.
std::string escape(std::string_view field);

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double v);

}  // namespace facet::csv
