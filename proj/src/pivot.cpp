#include "tscreen/pivot.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "tscreen/csv.hpp"
#include "tscreen/errors.hpp"

namespace tscreen {

PivotTable pivot(const CountCube& cube, const std::string& row_attr, const std::string& col_attr,
                 const Conjunction& filter, const DateWindow& window, ColumnOrder order) {
  const auto& schema = cube.schema();
  if (row_attr == col_attr) throw QueryError("pivot row and column attributes must differ");
  const auto row_dim = schema.require_dimension(row_attr);
  const auto col_dim = schema.require_dimension(col_attr);
  if (filter.terms.count(row_attr) || filter.terms.count(col_attr)) {
    throw QueryError("pivot filter must not constrain the pivot attributes");
  }
  const auto base = resolve(filter, schema);
  cube.check_window(window);

  const std::size_t n_rows = schema.label_count(row_dim);
  const std::size_t n_cols = schema.label_count(col_dim);

  std::vector<std::size_t> col_order(n_cols);
  std::iota(col_order.begin(), col_order.end(), 0);
  if (order == ColumnOrder::kGlobalFrequency) {
    std::vector<std::uint64_t> freq(n_cols);
    const DateWindow all{cube.first_day(), cube.calendar_days()};
    for (std::size_t c = 0; c < n_cols; ++c) {
      ResolvedConjunction q{{ResolvedTerm{col_dim, {static_cast<LabelId>(c)}}}};
      freq[c] = cube.calendar_days() > 0 ? cube.count(q, all) : 0;
    }
    std::stable_sort(col_order.begin(), col_order.end(), [&](auto x, auto y) { return freq[x] > freq[y]; });
  }

  auto with = [](ResolvedConjunction q, std::size_t dim, std::size_t label) {
    q.terms.push_back({dim, {static_cast<LabelId>(label)}});
    std::sort(q.terms.begin(), q.terms.end(), [](const auto& a, const auto& b) { return a.dim < b.dim; });
    return q;
  };

  PivotTable t;
  t.row_attribute = row_attr;
  t.col_attribute = col_attr;
  for (std::size_t r = 0; r < n_rows; ++r) t.row_labels.push_back(schema.label(row_dim, static_cast<LabelId>(r)));
  for (auto c : col_order) t.col_labels.push_back(schema.label(col_dim, static_cast<LabelId>(c)));

  for (std::size_t r = 0; r < n_rows; ++r) {
    const auto row_q = with(base, row_dim, r);
    const auto row_total = cube.count(row_q, window);
    std::vector<std::uint64_t> joint(n_cols, 0);
    std::vector<double> cells(n_cols, 0.0);
    if (row_total > 0) {
      for (std::size_t k = 0; k < n_cols; ++k) {
        joint[k] = cube.count(with(row_q, col_dim, col_order[k]), window);
        cells[k] = static_cast<double>(joint[k]) / static_cast<double>(row_total);
      }
    }
    t.row_counts.push_back(row_total);
    t.joint_counts.push_back(std::move(joint));
    t.cells.push_back(std::move(cells));
    t.zero_rows.push_back(row_total == 0);
  }
  return t;
}

std::map<std::string, std::string> row_argmax(const PivotTable& table) {
  std::map<std::string, std::string> out;
  for (std::size_t r = 0; r < table.row_labels.size(); ++r) {
    if (table.zero_rows[r] || table.cells[r].empty()) continue;
    const auto& row = table.cells[r];
    auto it = std::max_element(row.begin(), row.end());  // first maximum
    out[table.row_labels[r]] = table.col_labels[static_cast<std::size_t>(it - row.begin())];
  }
  return out;
}

nlohmann::json PivotTable::to_json() const {
  nlohmann::json j;
  j["row_attribute"] = row_attribute;
  j["col_attribute"] = col_attribute;
  j["row_labels"] = row_labels;
  j["col_labels"] = col_labels;
  j["cells"] = cells;
  j["joint_counts"] = joint_counts;
  j["row_counts"] = row_counts;
  j["zero_rows"] = zero_rows;
  return j;
}

void PivotTable::write_csv(std::ostream& out) const {
  std::vector<std::string> fields{row_attribute + "\\" + col_attribute};
  fields.insert(fields.end(), col_labels.begin(), col_labels.end());
  fields.emplace_back("row_count");
  out << csv::join(fields) << '\n';
  char buf[32];
  for (std::size_t r = 0; r < row_labels.size(); ++r) {
    fields = {row_labels[r]};
    for (double v : cells[r]) {
      std::snprintf(buf, sizeof buf, "%.6f", v);
      fields.emplace_back(buf);
    }
    fields.push_back(std::to_string(row_counts[r]));
    out << csv::join(fields) << '\n';
  }
}

void PivotTable::write_text(std::ostream& out) const {
  static const char* kShades[] = {" ", "░", "▒", "▓", "█"};
  std::size_t width = row_attribute.size();
  for (const auto& l : row_labels) width = std::max(width, l.size());
  out << row_attribute << std::string(width - row_attribute.size() + 1, ' ') << "|";
  for (std::size_t c = 0; c < col_labels.size(); ++c) out << ' ' << c;
  out << "\n";
  for (std::size_t r = 0; r < row_labels.size(); ++r) {
    out << row_labels[r] << std::string(width - row_labels[r].size() + 1, ' ') << "|";
    for (std::size_t c = 0; c < col_labels.size(); ++c) {
      const double v = cells[r][c];
      const int level = v <= 0.0 ? 0 : std::min(4, 1 + static_cast<int>(v * 4.0));
      const auto pad = std::to_string(c).size();
      out << ' ';
      for (std::size_t k = 0; k < pad; ++k) out << kShades[level];
    }
    out << (zero_rows[r] ? " (no events)" : "") << "\n";
  }
  out << "columns:";
  for (std::size_t c = 0; c < col_labels.size(); ++c) out << ' ' << c << '=' << col_labels[c];
  out << "\n";
}

}  // namespace tscreen
