#pragma once

// Minimal RFC 4180 reader/writer: `,` delimiter, `"` quoting, `\n` records.

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "specialism/common.hpp"

namespace specialism::csv {

using Row = std::vector<std::string>;

/// Streams records from a CSV source. Quoted fields may span lines;
/// `line()` reports the physical line on which the current record started.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::optional<Row> next() {
    Row row;
    std::string field;
    bool in_quotes = false;
    bool any = false;
    record_line_ = line_ + 1;
    int ch;
    while ((ch = in_.get()) != std::char_traits<char>::eof()) {
      any = true;
      const char c = static_cast<char>(ch);
      if (in_quotes) {
        if (c == '"') {
          if (in_.peek() == '"') {
            in_.get();
            field.push_back('"');
          } else {
            in_quotes = false;
          }
        } else {
          if (c == '\n') ++line_;
          field.push_back(c);
        }
        continue;
      }
      if (c == '"') {
        in_quotes = true;
      } else if (c == ',') {
        row.push_back(std::move(field));
        field.clear();
      } else if (c == '\n') {
        ++line_;
        if (!field.empty() && field.back() == '\r') field.pop_back();
        row.push_back(std::move(field));
        return row;
      } else {
        field.push_back(c);
      }
    }
    if (in_quotes) {
      throw DataError("unterminated quoted field starting on line " +
                      std::to_string(record_line_));
    }
    if (!any) return std::nullopt;
    ++line_;
    if (!field.empty() && field.back() == '\r') field.pop_back();
    row.push_back(std::move(field));
    return row;
  }

  std::size_t line() const { return record_line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
  std::size_t record_line_ = 0;
};

inline std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline std::string join_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += escape(fields[i]);
  }
  out.push_back('\n');
  return out;
}

// List cells join items with ';'. A literal ';' or '\' inside an item is
// backslash-escaped so that lists survive a round trip.
inline std::string join_list(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out.push_back(';');
    for (char c : items[i]) {
      if (c == ';' || c == '\\') out.push_back('\\');
      out.push_back(c);
    }
  }
  return out;
}

inline std::vector<std::string> split_list(std::string_view cell) {
  std::vector<std::string> items;
  if (cell.empty()) return items;
  std::string cur;
  for (std::size_t i = 0; i < cell.size(); ++i) {
    const char c = cell[i];
    if (c == '\\' && i + 1 < cell.size()) {
      cur.push_back(cell[++i]);
    } else if (c == ';') {
      items.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  items.push_back(std::move(cur));
  return items;
}

}  // namespace specialism::csv
