#include "tscreen/schema.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "tscreen/errors.hpp"

namespace tscreen {
namespace {

// Two-byte UTF-8 Latin-1 letters folded to their ASCII base.
char fold_latin1(unsigned char lead, unsigned char cont) {
  if (lead != 0xC3) return 0;
  switch (cont) {
    case 0x81: case 0xA1: case 0x80: case 0xA0: case 0x84: case 0xA4: return 'A';
    case 0x89: case 0xA9: case 0x88: case 0xA8: case 0x8B: case 0xAB: return 'E';
    case 0x8D: case 0xAD: case 0x8C: case 0xAC: case 0x8F: case 0xAF: return 'I';
    case 0x93: case 0xB3: case 0x92: case 0xB2: case 0x96: case 0xB6: return 'O';
    case 0x9A: case 0xBA: case 0x99: case 0xB9: case 0x9C: case 0xBC: return 'U';
    case 0x91: case 0xB1: return 'N';
    case 0x87: case 0xA7: return 'C';
    default: return 0;
  }
}

const char* kind_name(AttributeKind kind) {
  switch (kind) {
    case AttributeKind::kCategorical: return "categorical";
    case AttributeKind::kDate: return "date";
    case AttributeKind::kIntegerBinned: return "integer_binned";
  }
  return "categorical";
}

AttributeKind parse_kind(const std::string& s) {
  if (s == "categorical") return AttributeKind::kCategorical;
  if (s == "date") return AttributeKind::kDate;
  if (s == "integer_binned" || s == "integer-binned") return AttributeKind::kIntegerBinned;
  throw ConfigError("unknown attribute kind '" + s + "'");
}

}  // namespace

std::string normalize_label(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    auto c = static_cast<unsigned char>(raw[i]);
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      pending_space = !out.empty();
      continue;
    }
    char folded = 0;
    if (c >= 0x80 && i + 1 < raw.size()) {
      folded = fold_latin1(c, static_cast<unsigned char>(raw[i + 1]));
      if (folded) ++i;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    if (folded) {
      out.push_back(folded);
    } else if (c < 0x80) {
      out.push_back(static_cast<char>(std::toupper(c)));
    } else {
      out.push_back(static_cast<char>(c));
    }
  }
  return out;
}

std::size_t bin_index(int value, std::span<const int> edges) {
  auto it = std::upper_bound(edges.begin(), edges.end(), value);
  return static_cast<std::size_t>(it - edges.begin()) - 1;
}

std::vector<std::string> default_bin_labels(std::span<const int> edges) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (i + 1 < edges.size()) {
      labels.push_back(std::to_string(edges[i]) + "-" + std::to_string(edges[i + 1] - 1));
    } else {
      labels.push_back(std::to_string(edges[i]) + "+");
    }
  }
  return labels;
}

Schema::Schema(std::vector<AttributeSpec> attributes, DateFormat date_format,
               std::optional<std::pair<Day, Day>> date_range)
    : attributes_(std::move(attributes)), date_format_(date_format), date_range_(date_range) {
  if (date_range_ && date_range_->first > date_range_->second) {
    throw ConfigError("date range start after end");
  }
  std::set<std::string> names;
  int date_count = 0;
  for (std::size_t i = 0; i < attributes_.size(); ++i) {
    auto& a = attributes_[i];
    if (a.name.empty()) throw ConfigError("attribute with empty name");
    if (!names.insert(a.name).second) throw ConfigError("duplicate attribute name '" + a.name + "'");

    switch (a.kind) {
      case AttributeKind::kDate:
        ++date_count;
        date_attr_ = i;
        break;
      case AttributeKind::kIntegerBinned: {
        if (a.edges.empty()) throw ConfigError("attribute '" + a.name + "' has no bin edges");
        for (std::size_t k = 1; k < a.edges.size(); ++k) {
          if (a.edges[k] <= a.edges[k - 1]) {
            throw ConfigError("bin edges of '" + a.name + "' are not strictly increasing");
          }
        }
        if (a.edges.front() < 0) throw ConfigError("bin edges of '" + a.name + "' start below 0");
        if (a.max_value < a.edges.back()) {
          throw ConfigError("bin edges of '" + a.name + "' exceed the declared maximum");
        }
        if (!a.labels.empty() && a.labels.back() == kUnknownLabel) a.labels.pop_back();
        if (a.labels.empty()) a.labels = default_bin_labels(a.edges);
        if (a.labels.size() != a.edges.size()) {
          throw ConfigError("attribute '" + a.name + "' needs one label per bin");
        }
        if (a.location) throw ConfigError("binned attribute '" + a.name + "' cannot be a location");
        break;
      }
      case AttributeKind::kCategorical:
        if (a.labels.empty() && !a.open_domain) {
          throw ConfigError("categorical attribute '" + a.name + "' has an empty domain");
        }
        break;
    }
    if (a.kind != AttributeKind::kDate) {
      if (!a.labels.empty() && a.labels.back() == kUnknownLabel) a.labels.pop_back();
      std::set<std::string> seen;
      for (const auto& l : a.labels) {
        auto key = normalize_label(l);
        if (key.empty()) throw ConfigError("attribute '" + a.name + "' has a blank label");
        if (key == kUnknownLabel) throw ConfigError("label UNKNOWN is reserved in '" + a.name + "'");
        if (!seen.insert(key).second) {
          throw ConfigError("duplicate label '" + l + "' in attribute '" + a.name + "'");
        }
      }
      a.labels.emplace_back(kUnknownLabel);
      for (const auto& [from, to] : a.aliases) {
        if (std::find(a.labels.begin(), a.labels.end(), to) == a.labels.end()) {
          throw ConfigError("alias '" + from + "' of '" + a.name + "' targets unknown label '" + to + "'");
        }
      }
      if (a.labels.size() > 65535) throw ConfigError("domain of '" + a.name + "' too large");
    }
  }
  if (date_count != 1) throw ConfigError("schema needs exactly one date attribute");
  int locations = 0;
  for (const auto& a : attributes_) locations += a.location ? 1 : 0;
  if (locations > 1) throw ConfigError("schema has more than one location attribute");
  index();
}

void Schema::index() {
  dims_.clear();
  lookup_.clear();
  for (std::size_t i = 0; i < attributes_.size(); ++i) {
    if (attributes_[i].kind == AttributeKind::kDate) continue;
    dims_.push_back(i);
    const auto& a = attributes_[i];
    std::unordered_map<std::string, LabelId> map;
    for (std::size_t l = 0; l < a.labels.size(); ++l) map.emplace(normalize_label(a.labels[l]), static_cast<LabelId>(l));
    for (const auto& [from, to] : a.aliases) {
      auto id = map.at(normalize_label(to));
      map.emplace(normalize_label(from), id);
    }
    lookup_.push_back(std::move(map));
  }
}

std::optional<std::size_t> Schema::dimension_index(std::string_view name) const {
  for (std::size_t d = 0; d < dims_.size(); ++d) {
    if (dimension(d).name == name) return d;
  }
  return std::nullopt;
}

std::size_t Schema::require_dimension(std::string_view name) const {
  auto d = dimension_index(name);
  if (!d) throw QueryError("unknown attribute '" + std::string(name) + "'");
  return *d;
}

std::optional<std::size_t> Schema::location_dimension() const {
  for (std::size_t d = 0; d < dims_.size(); ++d) {
    if (dimension(d).location) return d;
  }
  return std::nullopt;
}

std::optional<std::size_t> Schema::age_dimension() const {
  for (std::size_t d = 0; d < dims_.size(); ++d) {
    if (dimension(d).kind == AttributeKind::kIntegerBinned) return d;
  }
  return std::nullopt;
}

std::optional<LabelId> Schema::find_label(std::size_t dim, std::string_view label) const {
  const auto& map = lookup_[dim];
  auto it = map.find(normalize_label(label));
  if (it == map.end()) return std::nullopt;
  return it->second;
}

LabelId Schema::resolve_raw(std::size_t dim, std::string_view raw) const {
  return find_label(dim, raw).value_or(unknown_id(dim));
}

Schema Schema::with_domain(std::size_t dim, std::vector<std::string> labels) const {
  auto attrs = attributes_;
  auto& a = attrs[dims_[dim]];
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  std::erase(labels, std::string(kUnknownLabel));
  a.labels = std::move(labels);
  a.labels.emplace_back(kUnknownLabel);
  a.open_domain = false;
  return Schema(std::move(attrs), date_format_, date_range_);
}

bool Schema::has_open_domains() const {
  return std::any_of(attributes_.begin(), attributes_.end(), [](const auto& a) { return a.open_domain; });
}

nlohmann::json Schema::to_json() const {
  nlohmann::json j;
  j["date_format"] = std::string(date_format_name(date_format_));
  if (date_range_) {
    j["date_range"] = {format_date(date_range_->first), format_date(date_range_->second)};
  }
  auto& arr = j["attributes"] = nlohmann::json::array();
  for (const auto& a : attributes_) {
    nlohmann::json o;
    o["name"] = a.name;
    o["kind"] = kind_name(a.kind);
    if (!a.column.empty()) o["column"] = a.column;
    if (a.kind != AttributeKind::kDate) {
      std::vector<std::string> labels(a.labels.begin(), a.labels.end() - 1);
      // A closed domain that only ever saw blanks keeps its UNKNOWN label.
      o["labels"] = labels.empty() && !a.open_domain ? a.labels : labels;
    }
    if (a.kind == AttributeKind::kIntegerBinned) {
      o["edges"] = a.edges;
      o["max"] = a.max_value;
    }
    if (a.open_domain) o["open"] = true;
    if (a.location) o["location"] = true;
    if (!a.aliases.empty()) o["aliases"] = a.aliases;
    arr.push_back(std::move(o));
  }
  return j;
}

Schema Schema::from_json(const nlohmann::json& j) {
  try {
    std::vector<AttributeSpec> attrs;
    for (const auto& o : j.at("attributes")) {
      AttributeSpec a;
      a.name = o.at("name").get<std::string>();
      a.kind = parse_kind(o.value("kind", std::string("categorical")));
      a.column = o.value("column", std::string());
      a.labels = o.value("labels", std::vector<std::string>{});
      a.edges = o.value("edges", std::vector<int>{});
      a.max_value = o.value("max", 120);
      a.open_domain = o.value("open", false);
      a.location = o.value("location", false);
      a.aliases = o.value("aliases", std::map<std::string, std::string>{});
      attrs.push_back(std::move(a));
    }
    auto format = parse_date_format(j.value("date_format", std::string("YYYY-MM-DD")));
    std::optional<std::pair<Day, Day>> range;
    if (j.contains("date_range")) {
      const auto& r = j.at("date_range");
      range = std::pair{parse_date_or_throw(r.at(0).get<std::string>()),
                        parse_date_or_throw(r.at(1).get<std::string>())};
    }
    return Schema(std::move(attrs), format, range);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed schema: ") + e.what());
  }
}

Schema Schema::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open schema file '" + path + "'");
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("schema file '" + path + "' is not valid JSON: " + e.what());
  }
}

std::vector<int> default_age_edges() { return {0, 5, 12, 15, 18, 26, 36, 46, 56}; }

Schema default_schema() {
  std::vector<AttributeSpec> attrs;
  attrs.push_back({.name = "date", .kind = AttributeKind::kDate});

  AttributeSpec age{.name = "age", .kind = AttributeKind::kIntegerBinned};
  age.edges = default_age_edges();
  age.max_value = 120;
  attrs.push_back(age);

  attrs.push_back({.name = "gender",
                   .labels = {"female", "male"},
                   .aliases = {{"F", "female"}, {"M", "male"}, {"femenino", "female"}, {"masculino", "male"},
                               {"mujer", "female"}, {"hombre", "male"}}});

  attrs.push_back({.name = "state",
                   .labels = {"AHUACHAPAN", "SANTA ANA", "SONSONATE", "CHALATENANGO", "LA LIBERTAD",
                              "SAN SALVADOR", "CUSCATLAN", "LA PAZ", "CABANAS", "SAN VICENTE", "USULUTAN",
                              "SAN MIGUEL", "MORAZAN", "LA UNION"},
                   .location = true});

  attrs.push_back({.name = "municipality", .open_domain = true});

  attrs.push_back({.name = "scene",
                   .labels = {"victim's house", "aggressor's house", "empty lot", "public road", "vehicle",
                              "school", "workplace", "other"},
                   .aliases = {{"casa de la victima", "victim's house"},
                               {"vivienda de la victima", "victim's house"},
                               {"casa del agresor", "aggressor's house"},
                               {"vivienda del agresor", "aggressor's house"},
                               {"predio baldio", "empty lot"},
                               {"via publica", "public road"},
                               {"vehiculo", "vehicle"},
                               {"centro escolar", "school"},
                               {"escuela", "school"},
                               {"lugar de trabajo", "workplace"},
                               {"otro", "other"},
                               {"otros", "other"}}});

  attrs.push_back({.name = "perpetrator",
                   .labels = {"boyfriend", "acquaintance", "stranger", "neighbour", "stepfather", "father",
                              "uncle", "friend", "cousin", "brother", "grandfather", "life partner",
                              "husband", "ex-boyfriend", "ex-life partner", "brother-in-law", "study partner",
                              "boss", "acquaintances", "strangers", "acquaintance & strangers",
                              "family members & acquaintance"},
                   .aliases = {{"novio", "boyfriend"},
                               {"bf", "boyfriend"},
                               {"conocido", "acquaintance"},
                               {"aq", "acquaintance"},
                               {"desconocido", "stranger"},
                               {"str", "stranger"},
                               {"vecino", "neighbour"},
                               {"neighbor", "neighbour"},
                               {"nbr", "neighbour"},
                               {"padrastro", "stepfather"},
                               {"padre", "father"},
                               {"tio", "uncle"},
                               {"amigo", "friend"},
                               {"primo", "cousin"},
                               {"hermano", "brother"},
                               {"abuelo", "grandfather"},
                               {"companero de vida", "life partner"},
                               {"esposo", "husband"},
                               {"ex novio", "ex-boyfriend"},
                               {"ex companero de vida", "ex-life partner"},
                               {"cunado", "brother-in-law"},
                               {"companero de estudio", "study partner"},
                               {"jefe", "boss"},
                               {"patron", "boss"},
                               {"conocidos", "acquaintances"},
                               {"desconocidos", "strangers"},
                               {"conocido y desconocidos", "acquaintance & strangers"},
                               {"familiares y conocido", "family members & acquaintance"}}});

  return Schema(std::move(attrs), DateFormat::kIso);
}

}  // namespace tscreen
