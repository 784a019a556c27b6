#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "tscreen/conjunction.hpp"
#include "tscreen/date.hpp"
#include "tscreen/ingest.hpp"
#include "tscreen/schema.hpp"

namespace tscreen {

/// Events sharing fixed labels, arriving at `rate` per day. Dimensions not
/// listed in `values` are drawn uniformly from their domain (UNKNOWN excluded).
struct Stratum {
  std::map<std::string, std::string> values;
  double rate = 0.0;
};

/// Multiplies the rate of every stratum matching `terms` over [start, end].
struct Injection {
  Conjunction terms;
  Day start;
  Day end;
  double multiplier = 1.0;
};

struct SyntheticConfig {
  Schema schema;
  Day start;
  Day end;
  std::vector<Stratum> strata;
  std::vector<Injection> injections;
  std::uint64_t seed = 0;

  /// Reads the JSON config format documented in README.md. Schema comes
  /// from `schema` (inline object or path) or the default schema.
  static SyntheticConfig from_json(const nlohmann::json& j);
  static SyntheticConfig load(const std::string& path);
};

/// One stratum per label combination of `attributes`, sharing `total_rate` equally.
std::vector<Stratum> uniform_strata(const Schema& schema, const std::vector<std::string>& attributes,
                                    double total_rate);

/// Independent Poisson counts per stratum and day; deterministic in the seed.
/// Throws ConfigError on negative rates or multipliers, injections outside the
/// calendar, or injection terms on attributes not fixed by every stratum.
std::vector<EventRecord> generate_synthetic(const SyntheticConfig& config);

}  // namespace tscreen
