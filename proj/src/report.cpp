#include "cdmrg/report.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>
#include <type_traits>

#include "cdmrg/types.hpp"

namespace cdmrg {

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) {
    throw InvalidInput("Table: row has " + std::to_string(row.size()) + " cells, expected " +
                       std::to_string(columns.size()));
  }
  rows.push_back(std::move(row));
}

std::size_t Table::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw InvalidInput("Table: no column '" + std::string(name) + "'");
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string format_cell(const Cell& cell) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::string>) {
          return v;
        } else if constexpr (std::is_same_v<T, double>) {
          return format_double(v);
        } else if constexpr (std::is_same_v<T, bool>) {
          return v ? "true" : "false";
        } else {
          return std::to_string(v);
        }
      },
      cell);
}

namespace {

std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void append_line(std::string& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out += ',';
    out += quote(fields[i]);
  }
  out += "\r\n";
}

}  // namespace

std::string to_csv(const Table& table) {
  std::string out;
  append_line(out, table.columns);
  std::vector<std::string> fields;
  for (const auto& row : table.rows) {
    fields.clear();
    for (const auto& cell : row) fields.push_back(format_cell(cell));
    append_line(out, fields);
  }
  return out;
}

const Table& Report::table(std::string_view name) const {
  for (const auto& [n, t] : tables) {
    if (n == name) return t;
  }
  throw InvalidInput("Report: no table '" + std::string(name) + "'");
}

}  // namespace cdmrg
