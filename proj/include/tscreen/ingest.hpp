#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tscreen/date.hpp"
#include "tscreen/schema.hpp"

namespace tscreen {

/// One event. `values` holds one label id per schema dimension (date excluded).
struct EventRecord {
  Day date;
  std::vector<LabelId> values;
  std::optional<int> raw_age;

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

struct RowError {
  std::size_t line = 0;
  std::string cause;
};

struct ParseResult {
  std::vector<EventRecord> records;
  std::vector<RowError> errors;
  /// Input schema with open domains closed over the observed labels.
  Schema schema;
};

/// Parses delimiter-separated text with a header row. Malformed rows are
/// reported, not fatal; a missing header column throws SchemaMismatch.
ParseResult parse_events(std::istream& in, const Schema& schema, char delimiter = ',');
ParseResult parse_events_file(const std::string& path, const Schema& schema, char delimiter = ',');

/// Writes records in the schema's column order and date format.
void write_events(std::ostream& out, const std::vector<EventRecord>& records, const Schema& schema);

/// Copy of `schema` that reads and writes the canonical file layout
/// (ISO dates, column names equal to attribute names).
Schema canonical_schema(const Schema& schema);

/// Bin label for a raw integer value.
const std::string& bin_age(int raw_age, const AttributeSpec& binned);

struct DatasetSummary {
  std::size_t total = 0;
  /// attribute name -> label -> count, over every dimension.
  std::map<std::string, std::map<std::string, std::size_t>> per_category_counts;
  std::size_t known_age_count = 0;
  std::optional<double> age_mean;
  std::optional<double> age_sd;  // sample standard deviation (n - 1)
  std::optional<std::pair<Day, Day>> date_range;
  std::map<int, std::size_t> age_histogram;

  nlohmann::json to_json() const;
};

DatasetSummary summarize(const std::vector<EventRecord>& records, const Schema& schema);

}  // namespace tscreen
