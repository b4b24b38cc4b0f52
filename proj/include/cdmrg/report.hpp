#ifndef CDMRG_REPORT_HPP
#define CDMRG_REPORT_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

namespace cdmrg {

using Cell = std::variant<std::string, double, std::int64_t, bool>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row);
  std::size_t column_index(std::string_view name) const;
};

// Shortest round-trip representation, '.' decimal separator. Non-finite
// values print as nan / inf / -inf.
std::string format_double(double x);
std::string format_cell(const Cell& cell);

// RFC 4180: CRLF line ends, fields quoted only when they contain a comma,
// quote, CR or LF.
std::string to_csv(const Table& table);

// A finished experiment: named tables (CSV) and a summary (JSON, sorted keys).
struct Report {
  std::string kind;
  std::vector<std::pair<std::string, Table>> tables;
  nlohmann::json summary = nlohmann::json::object();
  // Set when some DMRG run did not reach its energy tolerance.
  bool numerical_failure = false;

  const Table& table(std::string_view name) const;
};

}  // namespace cdmrg

#endif  // CDMRG_REPORT_HPP
