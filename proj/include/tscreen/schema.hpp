#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tscreen/date.hpp"

namespace tscreen {

using LabelId = std::uint16_t;

/// Reserved label for blank or unrecognized raw values.
inline constexpr std::string_view kUnknownLabel = "UNKNOWN";

enum class AttributeKind { kCategorical, kDate, kIntegerBinned };

struct AttributeSpec {
  std::string name;
  AttributeKind kind = AttributeKind::kCategorical;
  /// Source column in the input file; empty means same as name.
  std::string column;
  /// Categorical domain, or one label per bin for binned attributes.
  std::vector<std::string> labels;
  /// Binned attributes: lower bin edges, strictly increasing. The final bin is open-ended.
  std::vector<int> edges;
  /// Binned attributes: largest admissible raw value.
  int max_value = 120;
  /// Categorical attributes whose domain is discovered from the data (e.g. municipality).
  bool open_domain = false;
  /// Marks the spatial attribute aggregated into region sets.
  bool location = false;
  /// Raw spelling -> canonical label. Keys are matched after normalization.
  std::map<std::string, std::string> aliases;

  const std::string& source_column() const { return column.empty() ? name : column; }
};

/// Case/accents/whitespace-insensitive key used for label matching.
std::string normalize_label(std::string_view raw);

/// Index of the half-open bin [edges[i], edges[i+1]) containing value; values at or
/// beyond the last edge fall into the final open bin. Requires value >= edges.front().
std::size_t bin_index(int value, std::span<const int> edges);

/// Labels "lo-hi" for closed bins and "lo+" for the final open bin.
std::vector<std::string> default_bin_labels(std::span<const int> edges);

/// Ordered attribute list with one date attribute and any number of
/// categorical/binned "dimensions". Every dimension domain ends with UNKNOWN.
class Schema {
 public:
  Schema() = default;
  explicit Schema(std::vector<AttributeSpec> attributes, DateFormat date_format = DateFormat::kIso,
                  std::optional<std::pair<Day, Day>> date_range = std::nullopt);

  const std::vector<AttributeSpec>& attributes() const { return attributes_; }
  const AttributeSpec& date_attribute() const { return attributes_[date_attr_]; }
  DateFormat date_format() const { return date_format_; }
  const std::optional<std::pair<Day, Day>>& date_range() const { return date_range_; }

  std::size_t dimension_count() const { return dims_.size(); }
  const AttributeSpec& dimension(std::size_t dim) const { return attributes_[dims_[dim]]; }
  std::optional<std::size_t> dimension_index(std::string_view name) const;
  /// Throws QueryError on unknown names.
  std::size_t require_dimension(std::string_view name) const;
  std::optional<std::size_t> location_dimension() const;
  /// First integer-binned dimension; its raw value is kept on each record.
  std::optional<std::size_t> age_dimension() const;

  std::size_t label_count(std::size_t dim) const { return dimension(dim).labels.size(); }
  const std::string& label(std::size_t dim, LabelId id) const { return dimension(dim).labels[id]; }
  LabelId unknown_id(std::size_t dim) const { return static_cast<LabelId>(label_count(dim) - 1); }

  /// Exact (normalized) lookup of a canonical label or alias.
  std::optional<LabelId> find_label(std::size_t dim, std::string_view label) const;
  /// Maps a raw categorical value; blank or unrecognized values map to UNKNOWN.
  LabelId resolve_raw(std::size_t dim, std::string_view raw) const;

  /// Copy with the open domain of `dim` closed over the given labels (sorted, deduplicated).
  Schema with_domain(std::size_t dim, std::vector<std::string> labels) const;
  bool has_open_domains() const;

  nlohmann::json to_json() const;
  static Schema from_json(const nlohmann::json& j);
  static Schema load(const std::string& path);

  friend bool operator==(const Schema& a, const Schema& b) { return a.to_json() == b.to_json(); }

 private:
  void index();

  std::vector<AttributeSpec> attributes_;
  DateFormat date_format_ = DateFormat::kIso;
  std::optional<std::pair<Day, Day>> date_range_;
  std::size_t date_attr_ = 0;
  std::vector<std::size_t> dims_;
  std::vector<std::unordered_map<std::string, LabelId>> lookup_;
};

/// Schema for the canonical event file
/// `date,age,gender,state,municipality,scene,perpetrator`.
Schema default_schema();

/// Default age bin edges: 0-4, 5-11, 12-14, 15-17, 18-25, 26-35, 36-45, 46-55, 56+.
std::vector<int> default_age_edges();

}  // namespace tscreen
