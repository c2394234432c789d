#ifndef DNMR_CSV_HPP
#define DNMR_CSV_HPP

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include "dnmr/error.hpp"

namespace dnmr {

/// One CSV cell: reals are written as %.8e, integers and text verbatim.
using Cell = std::variant<double, std::int64_t, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row) {
    require(row.size() == columns.size(), "row width matches the header");
    rows.push_back(std::move(row));
  }
};

inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.8e", v);
  return buf;
}

namespace detail {

inline std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string cell_text(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_real(*d);
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  return quote_if_needed(std::get<std::string>(c));
}

}  // namespace detail

/// Header line plus one line per row, LF endings. An empty table is just the header.
inline std::string to_csv(const Table& t) {
  require(!t.columns.empty(), "table has at least one column");
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + detail::quote_if_needed(t.columns[i]);
  out += '\n';
  for (const auto& row : t.rows) {
    require(row.size() == t.columns.size(), "row width matches the header");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += detail::cell_text(row[i]);
    }
    out += '\n';
  }
  return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
  if (!f) throw std::runtime_error("cannot write " + path.string());
}

inline void write_csv(const std::filesystem::path& path, const Table& t) { write_text(path, to_csv(t)); }

}  // namespace dnmr

#endif
