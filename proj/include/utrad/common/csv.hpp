#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace utrad::csv {

using Row = std::vector<std::string>;

/// Parsed CSV: the first non-comment line is the header. Lines starting with
/// '#' are skipped. Quoted fields follow RFC 4180.
struct Document {
  Row header;
  std::vector<Row> rows;
  /// 1-based source line of each row, for error messages.
  std::vector<std::size_t> line_numbers;

  /// Index of a header column, or throws InputError naming the column.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;
};

Document read_file(const std::filesystem::path& path);
Document parse(std::string_view text);

/// Quote a field only when it contains a separator, quote, or newline.
std::string escape(std::string_view field);
std::string join(const Row& fields);

/// Shortest representation that round-trips a double exactly.
std::string format_double(double value);

std::vector<std::string> split(std::string_view text, char sep);
std::string trim(std::string_view text);

}  // namespace utrad::csv
