// Tabular results and their serialization: RFC-4180-style CSV with a header
// row plus a JSON metadata sidecar, both written atomically.
#pragma once

#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace sgflow::io {

using Cell = std::variant<double, long long, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row);
};

/// Formats a double with enough digits to round-trip (shortest of %.17g that
/// parses back exactly); infinities print as "inf"/"-inf".
std::string format_double(double value);

/// Serializes the table as CSV: header row, '.' decimal separator, UTF-8,
/// fields quoted only when they contain separators.
std::string to_csv(const Table& table);

/// Writes content to path via a temporary file and rename.
void atomic_write(const std::string& path, const std::string& content);

struct ResultFiles {
  std::string csv_path;
  std::string meta_path;
};

/// Writes <name>.csv and <name>.meta.json under dir (created if needed).
ResultFiles write_result(const std::string& dir, const std::string& name,
                         const Table& table, const nlohmann::json& metadata);

}  // namespace sgflow::io
