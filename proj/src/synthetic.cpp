#include "tscreen/synthetic.hpp"

#include <algorithm>
#include <fstream>
#include <random>

#include "tscreen/errors.hpp"

namespace tscreen {
namespace {

struct ResolvedStratum {
  std::vector<int> fixed;  // label id per dimension, -1 = drawn per event
  double rate;
};

int draw_raw_value(const AttributeSpec& spec, LabelId bin, std::mt19937_64& rng) {
  int lo = spec.edges[bin];
  int hi = static_cast<std::size_t>(bin) + 1 < spec.edges.size() ? spec.edges[bin + 1] - 1 : std::min(spec.max_value, lo + 24);
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

}  // namespace

std::vector<Stratum> uniform_strata(const Schema& schema, const std::vector<std::string>& attributes,
                                    double total_rate) {
  std::vector<std::size_t> dims;
  for (const auto& a : attributes) dims.push_back(schema.require_dimension(a));
  std::vector<Stratum> out{Stratum{}};
  for (auto d : dims) {
    std::vector<Stratum> next;
    for (const auto& s : out) {
      for (std::size_t l = 0; l + 1 < schema.label_count(d); ++l) {
        auto copy = s;
        copy.values[schema.dimension(d).name] = schema.label(d, static_cast<LabelId>(l));
        next.push_back(std::move(copy));
      }
    }
    out = std::move(next);
  }
  for (auto& s : out) s.rate = total_rate / static_cast<double>(out.size());
  return out;
}

std::vector<EventRecord> generate_synthetic(const SyntheticConfig& config) {
  const auto& schema = config.schema;
  if (config.end < config.start) throw ConfigError("synthetic calendar end precedes start");
  const std::size_t dims = schema.dimension_count();
  const auto age_dim = schema.age_dimension();

  std::vector<ResolvedStratum> strata;
  for (const auto& s : config.strata) {
    if (!(s.rate >= 0.0)) throw ConfigError("stratum rate must be >= 0");
    ResolvedStratum r{std::vector<int>(dims, -1), s.rate};
    for (const auto& [attr, label] : s.values) {
      auto d = schema.dimension_index(attr);
      if (!d) throw ConfigError("stratum names unknown attribute '" + attr + "'");
      auto id = schema.find_label(*d, label);
      if (!id) throw ConfigError("stratum names unknown label '" + label + "' of '" + attr + "'");
      r.fixed[*d] = *id;
    }
    strata.push_back(std::move(r));
  }

  struct ResolvedInjection {
    ResolvedConjunction terms;
    Day start, end;
    double multiplier;
  };
  std::vector<ResolvedInjection> injections;
  for (const auto& inj : config.injections) {
    if (!(inj.multiplier >= 0.0)) throw ConfigError("injection multiplier must be >= 0");
    if (inj.start > inj.end || inj.start < config.start || inj.end > config.end) {
      throw ConfigError("injection date range outside the synthetic calendar");
    }
    ResolvedConjunction terms;
    try {
      terms = resolve(inj.terms, schema);
    } catch (const QueryError& e) {
      throw ConfigError(std::string("injection: ") + e.what());
    }
    for (const auto& t : terms.terms) {
      for (const auto& s : strata) {
        if (s.fixed[t.dim] < 0) {
          throw ConfigError("injection term '" + schema.dimension(t.dim).name + "' is not fixed by every stratum");
        }
      }
    }
    injections.push_back({std::move(terms), inj.start, inj.end, inj.multiplier});
  }

  // Per stratum, which injections apply.
  std::vector<std::vector<std::size_t>> applies(strata.size());
  std::vector<LabelId> probe(dims);
  for (std::size_t s = 0; s < strata.size(); ++s) {
    for (std::size_t d = 0; d < dims; ++d) probe[d] = static_cast<LabelId>(std::max(strata[s].fixed[d], 0));
    for (std::size_t i = 0; i < injections.size(); ++i) {
      if (injections[i].terms.matches(probe)) applies[s].push_back(i);
    }
  }

  std::mt19937_64 rng(config.seed);
  std::vector<EventRecord> out;
  for (Day day = config.start; day <= config.end; day += std::chrono::days{1}) {
    for (std::size_t s = 0; s < strata.size(); ++s) {
      double rate = strata[s].rate;
      for (auto i : applies[s]) {
        if (day >= injections[i].start && day <= injections[i].end) rate *= injections[i].multiplier;
      }
      if (rate <= 0.0) continue;
      const int n = std::poisson_distribution<int>(rate)(rng);
      for (int k = 0; k < n; ++k) {
        EventRecord rec{day, std::vector<LabelId>(dims), std::nullopt};
        for (std::size_t d = 0; d < dims; ++d) {
          int fixed = strata[s].fixed[d];
          if (fixed >= 0) {
            rec.values[d] = static_cast<LabelId>(fixed);
          } else {
            auto n_labels = schema.label_count(d) - 1;  // UNKNOWN excluded
            rec.values[d] = n_labels == 0 ? schema.unknown_id(d)
                                          : static_cast<LabelId>(std::uniform_int_distribution<std::size_t>(
                                                0, n_labels - 1)(rng));
          }
        }
        if (age_dim && rec.values[*age_dim] != schema.unknown_id(*age_dim)) {
          rec.raw_age = draw_raw_value(schema.dimension(*age_dim), rec.values[*age_dim], rng);
        }
        out.push_back(std::move(rec));
      }
    }
  }
  return out;
}

SyntheticConfig SyntheticConfig::from_json(const nlohmann::json& j) {
  try {
    SyntheticConfig c;
    if (j.contains("schema")) {
      const auto& s = j.at("schema");
      c.schema = s.is_string() ? Schema::load(s.get<std::string>()) : Schema::from_json(s);
    } else {
      c.schema = default_schema();
    }
    if (c.schema.has_open_domains()) {
      // Open domains get a single placeholder label so that every dimension can be drawn.
      for (std::size_t d = 0; d < c.schema.dimension_count(); ++d) {
        if (c.schema.dimension(d).open_domain) c.schema = c.schema.with_domain(d, {"SYNTHETIC"});
      }
    }
    c.start = parse_date_or_throw(j.at("start").get<std::string>());
    c.end = parse_date_or_throw(j.at("end").get<std::string>());
    c.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("uniform")) {
      const auto& u = j.at("uniform");
      c.strata = uniform_strata(c.schema, u.at("attributes").get<std::vector<std::string>>(),
                                u.at("total_rate").get<double>());
    }
    for (const auto& s : j.value("strata", nlohmann::json::array())) {
      c.strata.push_back({s.value("values", std::map<std::string, std::string>{}), s.at("rate").get<double>()});
    }
    for (const auto& i : j.value("injections", nlohmann::json::array())) {
      c.injections.push_back({Conjunction::from_json(i.at("terms")),
                              parse_date_or_throw(i.at("start").get<std::string>()),
                              parse_date_or_throw(i.at("end").get<std::string>()),
                              i.at("multiplier").get<double>()});
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed synthetic config: ") + e.what());
  } catch (const QueryError& e) {
    throw ConfigError(std::string("malformed synthetic config: ") + e.what());
  }
}

SyntheticConfig SyntheticConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open synthetic config '" + path + "'");
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("synthetic config '" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace tscreen
