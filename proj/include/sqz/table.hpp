#pragma once
// Column-labeled result table: the common currency between sweeps, the CLI,
// and the serializers.  Cells are doubles or strings; numeric NaN marks
// fields a row could not produce.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sqz/errors.hpp"

namespace sqz {

using Cell = std::variant<double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  explicit Table(std::vector<std::string> cols = {}) : columns(std::move(cols)) {}

  void add_row(std::vector<Cell> row) {
    if (row.size() != columns.size())
      throw ConfigError("Table: row width " + std::to_string(row.size()) +
                        " does not match " + std::to_string(columns.size()) +
                        " columns");
    rows.push_back(std::move(row));
  }

  std::size_t col_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return i;
    throw ConfigError("Table: no column named " + name);
  }
};

}  // namespace sqz
