#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tscreen/conjunction.hpp"
#include "tscreen/cube.hpp"

namespace tscreen {

enum class ColumnOrder {
  kGlobalFrequency,  // descending count over the whole cube, ties by domain order
  kDomain,
};

/// Row-conditioned relative frequencies: cells[r][c] = P(col = c | row = r, filter, window).
struct PivotTable {
  std::string row_attribute;
  std::string col_attribute;
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  std::vector<std::vector<double>> cells;
  std::vector<std::vector<std::uint64_t>> joint_counts;
  std::vector<std::uint64_t> row_counts;
  std::vector<bool> zero_rows;

  nlohmann::json to_json() const;
  void write_csv(std::ostream& out) const;
  /// Terminal rendering with block-shaded cells.
  void write_text(std::ostream& out) const;
};

/// Throws QueryError when row == col, an attribute is unknown, or the filter
/// constrains a pivot attribute.
PivotTable pivot(const CountCube& cube, const std::string& row_attr, const std::string& col_attr,
                 const Conjunction& filter, const DateWindow& window, ColumnOrder order = ColumnOrder::kGlobalFrequency);

/// Modal column per non-zero row; ties go to the earlier column.
std::map<std::string, std::string> row_argmax(const PivotTable& table);

}  // namespace tscreen
