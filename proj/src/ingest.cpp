#include "tscreen/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "tscreen/csv.hpp"
#include "tscreen/errors.hpp"

namespace tscreen {
namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

// UTF-8 byte order mark on the first header cell.
std::string strip_bom(std::string s) {
  if (s.size() >= 3 && s.compare(0, 3, "\xEF\xBB\xBF") == 0) s.erase(0, 3);
  return s;
}

}  // namespace

const std::string& bin_age(int raw_age, const AttributeSpec& binned) {
  return binned.labels[bin_index(raw_age, binned.edges)];
}

ParseResult parse_events(std::istream& in, const Schema& schema, char delimiter) {
  csv::Reader reader(in, delimiter);
  ParseResult result;

  auto header = reader.next();
  if (!header) {
    // Empty input: no events, every open domain closes over nothing.
    result.schema = schema;
    for (std::size_t d = 0; d < schema.dimension_count(); ++d) {
      if (schema.dimension(d).open_domain) result.schema = result.schema.with_domain(d, {});
    }
    return result;
  }
  std::map<std::string, std::size_t> columns;
  for (std::size_t i = 0; i < header->size(); ++i) {
    auto name = lower(trim(i == 0 ? strip_bom((*header)[i]) : (*header)[i]));
    columns.emplace(name, i);
  }
  auto column_of = [&](const AttributeSpec& a) {
    auto it = columns.find(lower(a.source_column()));
    if (it == columns.end()) throw SchemaMismatch("missing header column '" + a.source_column() + "'");
    return it->second;
  };

  const std::size_t date_col = column_of(schema.date_attribute());
  const std::size_t dims = schema.dimension_count();
  std::vector<std::size_t> dim_cols(dims);
  for (std::size_t d = 0; d < dims; ++d) dim_cols[d] = column_of(schema.dimension(d));
  const std::size_t needed = std::max(date_col, dims ? *std::max_element(dim_cols.begin(), dim_cols.end()) : 0) + 1;
  const auto age_dim = schema.age_dimension();

  // Raw labels for open-domain dimensions, resolved after the pass.
  std::vector<std::size_t> open_dims;
  for (std::size_t d = 0; d < dims; ++d) {
    if (schema.dimension(d).open_domain) open_dims.push_back(d);
  }
  std::vector<std::vector<std::string>> open_raw(open_dims.size());

  while (auto row = reader.next()) {
    const auto line = reader.line();
    if (row->size() < needed) {
      result.errors.push_back({line, "expected at least " + std::to_string(needed) + " fields, got " +
                                         std::to_string(row->size())});
      continue;
    }
    auto date = parse_date((*row)[date_col], schema.date_format());
    if (!date) {
      result.errors.push_back({line, "unparseable date '" + (*row)[date_col] + "'"});
      continue;
    }
    if (const auto& range = schema.date_range(); range && (*date < range->first || *date > range->second)) {
      result.errors.push_back({line, "date " + format_date(*date) + " outside declared range"});
      continue;
    }

    EventRecord rec{*date, std::vector<LabelId>(dims), std::nullopt};
    bool ok = true;
    for (std::size_t d = 0; d < dims && ok; ++d) {
      const auto& spec = schema.dimension(d);
      auto raw = trim((*row)[dim_cols[d]]);
      if (spec.kind == AttributeKind::kIntegerBinned) {
        if (raw.empty() || normalize_label(raw) == kUnknownLabel) {
          rec.values[d] = schema.unknown_id(d);
          continue;
        }
        int value = 0;
        auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), value);
        if (ec != std::errc{} || ptr != raw.data() + raw.size()) {
          result.errors.push_back({line, "unparseable " + spec.name + " '" + raw + "'"});
          ok = false;
          break;
        }
        if (value < spec.edges.front() || value > spec.max_value) {
          result.errors.push_back({line, spec.name + " " + raw + " out of range"});
          ok = false;
          break;
        }
        rec.values[d] = static_cast<LabelId>(bin_index(value, spec.edges));
        if (age_dim && *age_dim == d) rec.raw_age = value;
      } else if (spec.open_domain) {
        auto key = normalize_label(raw);
        auto slot = std::find(open_dims.begin(), open_dims.end(), d) - open_dims.begin();
        open_raw[slot].push_back(key.empty() ? std::string(kUnknownLabel) : key);
      } else {
        rec.values[d] = schema.resolve_raw(d, raw);
      }
    }
    if (!ok) {
      for (auto& v : open_raw) {
        if (v.size() > result.records.size()) v.pop_back();
      }
      continue;
    }
    result.records.push_back(std::move(rec));
  }

  Schema closed = schema;
  for (std::size_t k = 0; k < open_dims.size(); ++k) {
    std::vector<std::string> domain = open_raw[k];
    closed = closed.with_domain(open_dims[k], std::move(domain));
  }
  for (std::size_t k = 0; k < open_dims.size(); ++k) {
    const auto d = open_dims[k];
    for (std::size_t r = 0; r < result.records.size(); ++r) {
      result.records[r].values[d] = closed.resolve_raw(d, open_raw[k][r]);
    }
  }
  result.schema = std::move(closed);
  return result;
}

ParseResult parse_events_file(const std::string& path, const Schema& schema, char delimiter) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open event file '" + path + "'");
  return parse_events(in, schema, delimiter);
}

Schema canonical_schema(const Schema& schema) {
  auto attrs = schema.attributes();
  for (auto& a : attrs) a.column.clear();
  return Schema(std::move(attrs), DateFormat::kIso, schema.date_range());
}

void write_events(std::ostream& out, const std::vector<EventRecord>& records, const Schema& schema) {
  const auto& attrs = schema.attributes();
  std::vector<std::string> fields;
  for (const auto& a : attrs) fields.push_back(a.source_column());
  out << csv::join(fields) << '\n';

  const auto age_dim = schema.age_dimension();
  for (const auto& rec : records) {
    fields.clear();
    std::size_t d = 0;
    for (const auto& a : attrs) {
      if (a.kind == AttributeKind::kDate) {
        fields.push_back(format_date(rec.date, schema.date_format()));
        continue;
      }
      const LabelId id = rec.values[d];
      if (a.kind == AttributeKind::kIntegerBinned) {
        if (id == schema.unknown_id(d)) {
          fields.emplace_back();
        } else if (age_dim && *age_dim == d && rec.raw_age) {
          fields.push_back(std::to_string(*rec.raw_age));
        } else {
          fields.push_back(std::to_string(a.edges[id]));
        }
      } else {
        fields.push_back(a.labels[id]);
      }
      ++d;
    }
    out << csv::join(fields) << '\n';
  }
}

DatasetSummary summarize(const std::vector<EventRecord>& records, const Schema& schema) {
  DatasetSummary s;
  s.total = records.size();
  const std::size_t dims = schema.dimension_count();
  std::vector<std::vector<std::size_t>> counts(dims);
  for (std::size_t d = 0; d < dims; ++d) counts[d].assign(schema.label_count(d), 0);

  // Welford's update for the age moments.
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t n = 0;
  for (const auto& r : records) {
    for (std::size_t d = 0; d < dims; ++d) ++counts[d][r.values[d]];
    if (r.raw_age) {
      ++n;
      double x = *r.raw_age;
      double delta = x - mean;
      mean += delta / static_cast<double>(n);
      m2 += delta * (x - mean);
      ++s.age_histogram[*r.raw_age];
    }
    if (!s.date_range) {
      s.date_range = std::pair{r.date, r.date};
    } else {
      s.date_range->first = std::min(s.date_range->first, r.date);
      s.date_range->second = std::max(s.date_range->second, r.date);
    }
  }
  for (std::size_t d = 0; d < dims; ++d) {
    auto& m = s.per_category_counts[schema.dimension(d).name];
    for (std::size_t l = 0; l < counts[d].size(); ++l) m[schema.label(d, static_cast<LabelId>(l))] = counts[d][l];
  }
  s.known_age_count = n;
  if (n > 0) s.age_mean = mean;
  if (n > 1) s.age_sd = std::sqrt(m2 / static_cast<double>(n - 1));
  return s;
}

nlohmann::json DatasetSummary::to_json() const {
  nlohmann::json j;
  j["total"] = total;
  j["per_category_counts"] = per_category_counts;
  j["known_age_count"] = known_age_count;
  j["age_mean"] = age_mean ? nlohmann::json(*age_mean) : nlohmann::json(nullptr);
  j["age_sd"] = age_sd ? nlohmann::json(*age_sd) : nlohmann::json(nullptr);
  if (date_range) {
    j["date_range"] = {format_date(date_range->first), format_date(date_range->second)};
  } else {
    j["date_range"] = nullptr;
  }
  auto& hist = j["age_histogram"] = nlohmann::json::array();
  for (const auto& [age, count] : age_histogram) hist.push_back({{"age", age}, {"count", count}});
  return j;
}

}  // namespace tscreen
