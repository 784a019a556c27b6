#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tscreen/schema.hpp"
#include "tscreen/screen.hpp"

namespace tscreen {

nlohmann::json report_to_json(const AnomalyReport& report, const Schema& schema);

/// One JSON object per line. `run` (the manifest digest) is attached to each line when non-empty.
void write_reports_jsonl(std::ostream& out, const std::vector<AnomalyReport>& reports, const Schema& schema,
                         const std::string& run = {});

/// Columns: states,end_date,p_value,count,expected_count.
void write_reports_csv(std::ostream& out, const std::vector<AnomalyReport>& reports);

/// "{A, B}" for a region, "ALL" without one.
std::string format_region(const AnomalyReport& report);

/// Fixed-width console table of the first `n` reports.
void print_top_table(std::ostream& out, const std::vector<AnomalyReport>& reports, const Schema& schema, int n);

}  // namespace tscreen
