#include "utrad/common/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "utrad/common/error.hpp"

namespace utrad::csv {

std::size_t Document::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw InputError("missing CSV column: " + std::string(name));
}

bool Document::has_column(std::string_view name) const {
  for (const auto& h : header) {
    if (h == name) return true;
  }
  return false;
}

namespace {

// Splits one logical record starting at `pos`; advances `pos` past the record
// terminator. Quoted fields may span physical lines.
Row parse_record(std::string_view text, std::size_t& pos, std::size_t& line) {
  Row fields;
  std::string field;
  bool quoted = false;
  bool field_started = false;
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
        ++pos;
        continue;
      }
      if (c == '\n') ++line;
      field.push_back(c);
      ++pos;
      continue;
    }
    if (c == '"' && !field_started) {
      quoted = true;
      field_started = true;
      ++pos;
      continue;
    }
    if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      field_started = false;
      ++pos;
      continue;
    }
    if (c == '\r') {
      ++pos;
      continue;
    }
    if (c == '\n') {
      ++pos;
      ++line;
      fields.push_back(std::move(field));
      return fields;
    }
    field.push_back(c);
    field_started = true;
    ++pos;
  }
  if (quoted) throw InputError("unterminated quoted CSV field near line " + std::to_string(line));
  fields.push_back(std::move(field));
  return fields;
}

bool blank(const Row& row) { return row.size() == 1 && trim(row[0]).empty(); }

}  // namespace

Document parse(std::string_view text) {
  Document doc;
  std::size_t pos = 0;
  std::size_t line = 1;
  // Strip UTF-8 byte order mark.
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") pos = 3;
  bool have_header = false;
  while (pos < text.size()) {
    if (text[pos] == '#') {
      while (pos < text.size() && text[pos] != '\n') ++pos;
      if (pos < text.size()) ++pos;
      ++line;
      continue;
    }
    const std::size_t start_line = line;
    Row row = parse_record(text, pos, line);
    if (blank(row)) continue;
    for (auto& f : row) f = trim(f);
    if (!have_header) {
      doc.header = std::move(row);
      have_header = true;
      continue;
    }
    if (row.size() != doc.header.size()) {
      throw InputError("CSV line " + std::to_string(start_line) + ": expected " +
                       std::to_string(doc.header.size()) + " fields, found " +
                       std::to_string(row.size()));
    }
    doc.rows.push_back(std::move(row));
    doc.line_numbers.push_back(start_line);
  }
  if (!have_header) throw InputError("CSV input is empty");
  return doc;
}

Document read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse(buffer.str());
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
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

std::string join(const Row& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += escape(fields[i]);
  }
  return out;
}

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw Error("failed to format double");
  return std::string(buf, end);
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto idx = text.find(sep, start);
    out.push_back(trim(text.substr(start, idx == std::string_view::npos ? idx : idx - start)));
    if (idx == std::string_view::npos) break;
    start = idx + 1;
  }
  return out;
}

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(first, last - first + 1));
}

}  // namespace utrad::csv
