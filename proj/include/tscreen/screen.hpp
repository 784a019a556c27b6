#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tscreen/conjunction.hpp"
#include "tscreen/cube.hpp"
#include "tscreen/geo.hpp"
#include "tscreen/stats.hpp"

namespace tscreen {

struct ScreeningConfig {
  /// Attributes to vary over. The location attribute, when listed, varies over region sets.
  std::vector<std::string> attributes;
  /// Empty: the schema's location attribute.
  std::string location_attribute;
  /// Terms present in every query (e.g. age=12-14, perpetrator=boyfriend).
  Conjunction fixed;
  int min_terms = 1;
  int max_fixed_terms = 3;
  int window_length = 28;
  int stride = 1;
  int reference_length = 365;
  int k_max = 5;
  double d_max_km = 50.0;
  AdmissibilityRule rule = AdmissibilityRule::kSeed;
  double alpha = 0.05;
  bool prospective = false;
  std::optional<Day> frontier;  // prospective mode; defaults to the calendar end
  bool include_unknown = false;
  bool benjamini_hochberg = false;
  unsigned workers = 1;  // 0: hardware concurrency
  int top_n = 5;

  /// Throws ConfigError when invariants fail or attributes are unknown.
  void validate(const Schema& schema) const;

  nlohmann::json to_json() const;
  static ScreeningConfig from_json(const nlohmann::json& j);
  static ScreeningConfig load(const std::string& path);
};

struct ScreeningQuery {
  ResolvedConjunction conjunction;  // non-spatial terms
  std::optional<RegionSet> region;
  DateWindow window;

  std::size_t term_count() const { return conjunction.size() + (region ? 1 : 0); }
};

struct AnomalyReport {
  ScreeningQuery query;
  std::uint64_t observed = 0;
  double expected = 0.0;
  double p_value = 1.0;
  TestKind test_used = TestKind::kFisher;
  std::optional<double> statistic;
  ContingencyTable table;
};

struct ScreenResult {
  std::vector<AnomalyReport> reports;  // ranked
  std::uint64_t scored = 0;
};

/// Region sets for a config: enumerated from the centroids under k_max/d_max/rule,
/// restricted to the schema's location labels.
std::vector<RegionSet> region_sets_for(const Schema& schema, const ScreeningConfig& config,
                                       const CentroidTable& centroids);

/// Visits every query in deterministic order.
void enumerate_queries(const CountCube& cube, const ScreeningConfig& config, const std::vector<RegionSet>& regions,
                       const std::function<void(const ScreeningQuery&)>& visit);
std::vector<ScreeningQuery> enumerate_queries(const CountCube& cube, const ScreeningConfig& config,
                                              const std::vector<RegionSet>& regions);

/// 2x2 table: target = conjunction within the region; complement = same
/// non-spatial terms outside the region (or every other event when there is
/// no region); current = the window; reference = the reference_length days
/// immediately before it.
AnomalyReport score_query(const CountCube& cube, const ScreeningQuery& q, const ScreeningConfig& config);

/// Scores every enumerated query; returns those with p <= alpha (or passing
/// Benjamini-Hochberg when enabled), ascending by p, then by larger
/// observed - expected, then by enumeration order. With `prospective` set it
/// delegates to prospective_screen at the configured frontier.
ScreenResult massive_screen(const CountCube& cube, const ScreeningConfig& config,
                            const std::vector<RegionSet>& regions);

/// massive_screen restricted to windows ending exactly at `frontier`; only
/// data up to the frontier is read. Throws EmptyScreen when the reference
/// period would start before the calendar.
ScreenResult prospective_screen(const CountCube& cube, const ScreeningConfig& config,
                                const std::vector<RegionSet>& regions, Day frontier);

struct TimelinePoint {
  DateWindow window;
  std::uint64_t observed = 0;
  double expected = 0.0;
  double p_value = 1.0;
  TestKind test_used = TestKind::kFisher;
};

/// Every admissible window (at config.stride) for one conjunction and optional
/// region. A location term inside `conjunction` is treated as the region.
std::vector<TimelinePoint> pvalue_timeline(const CountCube& cube, const Conjunction& conjunction,
                                           const std::optional<RegionSet>& region, const ScreeningConfig& config);

}  // namespace tscreen
