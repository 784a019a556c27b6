#include "tscreen/report_io.hpp"

#include <algorithm>
#include <cstdio>

#include "tscreen/csv.hpp"

namespace tscreen {
namespace {

std::string format_p(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2E", p);
  return buf;
}

std::string format_expected(double e) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", e);
  return buf;
}

}  // namespace

nlohmann::json report_to_json(const AnomalyReport& report, const Schema& schema) {
  nlohmann::json j;
  j["attributes"] = unresolve(report.query.conjunction, schema).to_json();
  j["region"] = report.query.region ? nlohmann::json(report.query.region->members) : nlohmann::json(nullptr);
  j["window_start"] = format_date(report.query.window.start);
  j["window_end"] = format_date(report.query.window.end());
  j["observed"] = report.observed;
  j["expected"] = report.expected;
  j["p_value"] = report.p_value;
  j["test"] = std::string(test_name(report.test_used));
  j["statistic"] = report.statistic ? nlohmann::json(*report.statistic) : nlohmann::json(nullptr);
  j["table"] = {report.table.a, report.table.b, report.table.c, report.table.d};
  return j;
}

void write_reports_jsonl(std::ostream& out, const std::vector<AnomalyReport>& reports, const Schema& schema,
                         const std::string& run) {
  for (const auto& r : reports) {
    auto j = report_to_json(r, schema);
    if (!run.empty()) j["run"] = run;
    out << j.dump() << '\n';
  }
}

std::string format_region(const AnomalyReport& report) {
  if (!report.query.region) return "ALL";
  std::string s = "{";
  const auto& m = report.query.region->members;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (i) s += ", ";
    s += m[i];
  }
  return s + "}";
}

void write_reports_csv(std::ostream& out, const std::vector<AnomalyReport>& reports) {
  out << "states,end_date,p_value,count,expected_count\n";
  for (const auto& r : reports) {
    out << csv::join({format_region(r), format_date(r.query.window.end(), DateFormat::kMonthDay), format_p(r.p_value),
                      std::to_string(r.observed), format_expected(r.expected)})
        << '\n';
  }
}

void print_top_table(std::ostream& out, const std::vector<AnomalyReport>& reports, const Schema& schema, int n) {
  const std::size_t rows = std::min<std::size_t>(reports.size(), static_cast<std::size_t>(std::max(n, 0)));
  std::vector<std::vector<std::string>> table{{"States", "End date", "P-Value", "Count", "Expected Count", "Terms"}};
  for (std::size_t i = 0; i < rows; ++i) {
    const auto& r = reports[i];
    table.push_back({format_region(r), format_date(r.query.window.end(), DateFormat::kMonthDay), format_p(r.p_value),
                     std::to_string(r.observed), format_expected(r.expected),
                     unresolve(r.query.conjunction, schema).to_string()});
  }
  std::vector<std::size_t> width(table[0].size(), 0);
  for (const auto& row : table) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  for (const auto& row : table) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << row[c];
      if (c + 1 < row.size()) out << std::string(width[c] - row[c].size() + 2, ' ');
    }
    out << '\n';
  }
}

}  // namespace tscreen
