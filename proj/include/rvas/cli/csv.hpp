#ifndef RVAS_CLI_CSV_HPP
#define RVAS_CLI_CSV_HPP

#include <cstdio>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include "rvas/error.hpp"

namespace rvas::cli {

using CsvCell = std::variant<std::string, double, long>;

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<CsvCell>> rows;
};

// 17 significant digits round-trips doubles exactly.
inline std::string format_cell(const CsvCell& cell) {
  if (const auto* s = std::get_if<std::string>(&cell)) return *s;
  if (const auto* i = std::get_if<long>(&cell)) return std::to_string(*i);
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", std::get<double>(cell));
  return buf;
}

inline std::string render_csv(const CsvTable& table) {
  detail::require(!table.rows.empty(), "emit_csv: table must be nonempty");
  std::string out;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) out.push_back(',');
    out += table.header[i];
  }
  out.push_back('\n');
  for (const auto& row : table.rows) {
    detail::require(row.size() == table.header.size(), "emit_csv: ragged row");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out.push_back(',');
      out += format_cell(row[i]);
    }
    out.push_back('\n');
  }
  return out;
}

inline void emit_csv(const CsvTable& table, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw io_error("emit_csv: cannot open " + path);
  const std::string body = render_csv(table);
  os.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!os) throw io_error("emit_csv: write failed for " + path);
}

}  // namespace rvas::cli

#endif  // RVAS_CLI_CSV_HPP
