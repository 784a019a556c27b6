#include "tscreen/screen.hpp"

#include <algorithm>
#include <fstream>
#include <thread>

#include "tscreen/errors.hpp"

namespace tscreen {
namespace {

std::optional<std::size_t> location_dim_of(const Schema& schema, const ScreeningConfig& config) {
  if (!config.location_attribute.empty()) return schema.require_dimension(config.location_attribute);
  return schema.location_dimension();
}

ResolvedTerm region_term(const Schema& schema, std::size_t loc_dim, const RegionSet& region) {
  ResolvedTerm t{loc_dim, {}};
  for (const auto& m : region.members) {
    auto id = schema.find_label(loc_dim, m);
    if (!id) throw QueryError("region member '" + m + "' is not a label of '" + schema.dimension(loc_dim).name + "'");
    t.labels.push_back(*id);
  }
  std::sort(t.labels.begin(), t.labels.end());
  t.labels.erase(std::unique(t.labels.begin(), t.labels.end()), t.labels.end());
  return t;
}

ResolvedConjunction with_term(ResolvedConjunction q, ResolvedTerm t) {
  q.terms.push_back(std::move(t));
  std::sort(q.terms.begin(), q.terms.end(), [](const auto& a, const auto& b) { return a.dim < b.dim; });
  return q;
}

// Queries sharing non-spatial terms; one probe per region (or a single probe without one).
struct Group {
  ResolvedConjunction nonspatial;
  std::vector<std::size_t> regions;  // indices into Plan::regions; empty: no spatial term
  std::uint64_t first_probe = 0;

  std::size_t probes() const { return regions.empty() ? 1 : regions.size(); }
};

struct Plan {
  std::optional<std::size_t> loc_dim;
  std::vector<RegionSet> regions;
  std::optional<std::size_t> fixed_region;
  std::vector<Group> groups;
  std::uint64_t probe_count = 0;
};

void combinations(std::size_t n, std::size_t k, std::vector<std::size_t>& cur, std::size_t from,
                  std::vector<std::vector<std::size_t>>& out) {
  if (cur.size() == k) {
    out.push_back(cur);
    return;
  }
  for (std::size_t i = from; i < n; ++i) {
    cur.push_back(i);
    combinations(n, k, cur, i + 1, out);
    cur.pop_back();
  }
}

Plan make_plan(const CountCube& cube, const ScreeningConfig& config, const std::vector<RegionSet>& regions) {
  const auto& schema = cube.schema();
  config.validate(schema);
  Plan plan;
  plan.loc_dim = location_dim_of(schema, config);

  // Split fixed terms into non-spatial terms and an optional fixed region.
  ResolvedConjunction fixed = resolve(config.fixed, schema);
  if (plan.loc_dim) {
    auto it = std::find_if(fixed.terms.begin(), fixed.terms.end(), [&](const auto& t) { return t.dim == *plan.loc_dim; });
    if (it != fixed.terms.end()) {
      RegionSet r;
      for (auto l : it->labels) r.members.push_back(schema.label(*plan.loc_dim, l));
      std::sort(r.members.begin(), r.members.end());
      r.seed = r.members.front();
      plan.regions.push_back(std::move(r));
      plan.fixed_region = 0;
      fixed.terms.erase(it);
    }
  }

  std::vector<std::size_t> varying;
  for (const auto& name : config.attributes) {
    auto d = schema.require_dimension(name);
    if (config.fixed.terms.count(name)) continue;
    if (std::find(varying.begin(), varying.end(), d) == varying.end()) varying.push_back(d);
  }

  bool uses_regions = plan.loc_dim && std::find(varying.begin(), varying.end(), *plan.loc_dim) != varying.end();
  if (uses_regions) {
    if (regions.empty()) {
      for (std::size_t l = 0; l + 1 < schema.label_count(*plan.loc_dim); ++l) {
        const auto& label = schema.label(*plan.loc_dim, static_cast<LabelId>(l));
        plan.regions.push_back({{label}, label});
      }
    } else {
      plan.regions = regions;
    }
    for (const auto& r : plan.regions) region_term(schema, *plan.loc_dim, r);  // validates members
  }

  const std::size_t fixed_count = fixed.size() + (plan.fixed_region ? 1 : 0);
  std::vector<std::vector<std::size_t>> subsets;
  if (varying.empty()) {
    if (fixed_count >= static_cast<std::size_t>(config.min_terms)) subsets.emplace_back();
  } else {
    for (std::size_t k = 1; k <= varying.size(); ++k) {
      const auto total = fixed_count + k;
      if (total < static_cast<std::size_t>(config.min_terms) || total > static_cast<std::size_t>(config.max_fixed_terms)) {
        continue;
      }
      std::vector<std::size_t> cur;
      combinations(varying.size(), k, cur, 0, subsets);
    }
  }

  for (const auto& subset : subsets) {
    std::vector<std::size_t> dims;
    bool spatial = false;
    for (auto i : subset) {
      if (uses_regions && varying[i] == *plan.loc_dim) {
        spatial = true;
      } else {
        dims.push_back(varying[i]);
      }
    }
    // Odometer over the labels of the non-spatial dimensions.
    std::vector<std::size_t> labels_per_dim;
    for (auto d : dims) labels_per_dim.push_back(schema.label_count(d) - (config.include_unknown ? 0 : 1));
    if (std::any_of(labels_per_dim.begin(), labels_per_dim.end(), [](auto n) { return n == 0; })) continue;
    std::vector<std::size_t> idx(dims.size(), 0);
    while (true) {
      Group g;
      g.nonspatial = fixed;
      for (std::size_t k = 0; k < dims.size(); ++k) {
        g.nonspatial = with_term(std::move(g.nonspatial), ResolvedTerm{dims[k], {static_cast<LabelId>(idx[k])}});
      }
      if (spatial) {
        for (std::size_t r = 0; r < plan.regions.size(); ++r) g.regions.push_back(r);
      } else if (plan.fixed_region) {
        g.regions.push_back(*plan.fixed_region);
      }
      g.first_probe = plan.probe_count;
      plan.probe_count += g.probes();
      plan.groups.push_back(std::move(g));

      std::size_t k = dims.size();
      while (k > 0) {
        if (++idx[k - 1] < labels_per_dim[k - 1]) break;
        idx[k - 1] = 0;
        --k;
      }
      if (k == 0) break;
    }
  }
  return plan;
}

// Window start offsets scored by a screen.
struct WindowSet {
  int first = 0;
  int count = 0;
  int stride = 1;
  int at(int i) const { return first + i * stride; }
};

WindowSet all_windows(const CountCube& cube, const ScreeningConfig& config) {
  WindowSet w{config.reference_length, 0, config.stride};
  const int last = cube.calendar_days() - config.window_length;
  if (last >= w.first) w.count = (last - w.first) / config.stride + 1;
  return w;
}

struct Candidate {
  AnomalyReport report;
  std::uint64_t ordinal;
};

bool ranks_before(const Candidate& x, const Candidate& y) {
  if (x.report.p_value != y.report.p_value) return x.report.p_value < y.report.p_value;
  const double ex = static_cast<double>(x.report.observed) - x.report.expected;
  const double ey = static_cast<double>(y.report.observed) - y.report.expected;
  if (ex != ey) return ex > ey;
  return x.ordinal < y.ordinal;
}

void scan_group(const CountCube& cube, const Plan& plan, const Group& g, const WindowSet& windows,
                const ScreeningConfig& config, std::vector<Candidate>& out) {
  const int len = config.window_length;
  const int ref = config.reference_length;
  const bool shortcut = config.alpha < 0.5;

  const Series base = g.regions.empty() ? cube.compute_series({}) : cube.compute_series(g.nonspatial);
  for (std::size_t p = 0; p < g.probes(); ++p) {
    const RegionSet* region = g.regions.empty() ? nullptr : &plan.regions[g.regions[p]];
    const ResolvedConjunction stratum_q =
        region ? with_term(g.nonspatial, region_term(cube.schema(), *plan.loc_dim, *region)) : g.nonspatial;
    const Series stratum = cube.compute_series(stratum_q);
    if (stratum.total() == 0) continue;
    const auto sp = stratum.prefix();
    const auto bp = base.prefix();
    const std::uint64_t probe = g.first_probe + p;

    for (int i = 0; i < windows.count; ++i) {
      const int f = windows.at(i);
      ContingencyTable t;
      t.a = sp[f + len] - sp[f];
      if (t.a == 0) continue;
      t.b = sp[f] - sp[f - ref];
      t.c = (bp[f + len] - bp[f]) - t.a;
      t.d = (bp[f] - bp[f - ref]) - t.b;
      if (shortcut && static_cast<double>(t.a) <= expected_count(t)) continue;  // p >= 0.5
      auto r = run_test(t);
      if (r.p_value > config.alpha) continue;

      AnomalyReport rep;
      rep.query.conjunction = g.nonspatial;
      if (region) rep.query.region = *region;
      rep.query.window = DateWindow{cube.day_at(f), len};
      rep.observed = t.a;
      rep.expected = r.expected_a;
      rep.p_value = r.p_value;
      rep.test_used = r.test_used;
      rep.statistic = r.statistic;
      rep.table = t;
      out.push_back({std::move(rep), probe * static_cast<std::uint64_t>(windows.count) + static_cast<std::uint64_t>(i)});
    }
  }
}

ScreenResult run_screen(const CountCube& cube, const ScreeningConfig& config, const Plan& plan,
                        const WindowSet& windows) {
  unsigned workers = config.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : config.workers;
  workers = std::min<unsigned>(workers, std::max<std::size_t>(1, plan.groups.size()));

  std::vector<std::vector<Candidate>> partial(workers);
  auto work = [&](unsigned w) {
    std::hash<std::string> hasher;
    for (const auto& g : plan.groups) {
      if (workers > 1 && hasher(g.nonspatial.key()) % workers != w) continue;
      scan_group(cube, plan, g, windows, config, partial[w]);
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> threads;
    for (unsigned w = 0; w < workers; ++w) threads.emplace_back(work, w);
  }

  std::vector<Candidate> all;
  for (auto& p : partial) std::move(p.begin(), p.end(), std::back_inserter(all));
  std::sort(all.begin(), all.end(), ranks_before);

  ScreenResult result;
  result.scored = plan.probe_count * static_cast<std::uint64_t>(windows.count);
  if (config.benjamini_hochberg && result.scored > 0) {
    // Step-up: keep the largest prefix whose last p satisfies p_(k) <= k * alpha / m.
    const double m = static_cast<double>(result.scored);
    std::size_t keep = 0;
    for (std::size_t k = 0; k < all.size(); ++k) {
      if (all[k].report.p_value <= static_cast<double>(k + 1) * config.alpha / m) keep = k + 1;
    }
    all.resize(keep);
  }
  result.reports.reserve(all.size());
  for (auto& c : all) result.reports.push_back(std::move(c.report));
  return result;
}

}  // namespace

void ScreeningConfig::validate(const Schema& schema) const {
  if (window_length < 1) throw ConfigError("window_length must be >= 1");
  if (stride < 1) throw ConfigError("stride must be >= 1");
  if (reference_length < window_length) throw ConfigError("reference_length must be >= window_length");
  if (max_fixed_terms < 1 || max_fixed_terms > 3) throw ConfigError("max_fixed_terms must be within 1..3");
  if (min_terms < 1 || min_terms > max_fixed_terms) throw ConfigError("min_terms must be within 1..max_fixed_terms");
  if (k_max < 1) throw ConfigError("k_max must be >= 1");
  if (!(d_max_km >= 0.0)) throw ConfigError("d_max_km must be >= 0");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must be within (0, 1]");
  if (static_cast<int>(fixed.size()) > max_fixed_terms) throw ConfigError("more fixed terms than max_fixed_terms");
  try {
    for (const auto& a : attributes) schema.require_dimension(a);
    if (!location_attribute.empty()) schema.require_dimension(location_attribute);
    resolve(fixed, schema);
  } catch (const QueryError& e) {
    throw ConfigError(e.what());
  }
}

nlohmann::json ScreeningConfig::to_json() const {
  nlohmann::json j;
  j["attributes"] = attributes;
  j["location_attribute"] = location_attribute;
  j["fixed"] = fixed.to_json();
  j["min_terms"] = min_terms;
  j["max_terms"] = max_fixed_terms;
  j["window_length"] = window_length;
  j["stride"] = stride;
  j["reference_length"] = reference_length;
  j["k_max"] = k_max;
  j["d_max_km"] = d_max_km;
  j["rule"] = rule == AdmissibilityRule::kSeed ? "seed" : "pairwise";
  j["alpha"] = alpha;
  j["prospective"] = prospective;
  j["frontier"] = frontier ? nlohmann::json(format_date(*frontier)) : nlohmann::json(nullptr);
  j["include_unknown"] = include_unknown;
  j["benjamini_hochberg"] = benjamini_hochberg;
  j["workers"] = workers;
  j["top_n"] = top_n;
  return j;
}

ScreeningConfig ScreeningConfig::from_json(const nlohmann::json& j) {
  try {
    ScreeningConfig c;
    c.attributes = j.value("attributes", c.attributes);
    c.location_attribute = j.value("location_attribute", c.location_attribute);
    if (j.contains("fixed")) c.fixed = Conjunction::from_json(j.at("fixed"));
    c.min_terms = j.value("min_terms", c.min_terms);
    c.max_fixed_terms = j.value("max_terms", c.max_fixed_terms);
    c.window_length = j.value("window_length", c.window_length);
    c.stride = j.value("stride", c.stride);
    c.reference_length = j.value("reference_length", c.reference_length);
    c.k_max = j.value("k_max", c.k_max);
    c.d_max_km = j.value("d_max_km", c.d_max_km);
    auto rule = j.value("rule", std::string("seed"));
    if (rule == "seed") {
      c.rule = AdmissibilityRule::kSeed;
    } else if (rule == "pairwise") {
      c.rule = AdmissibilityRule::kPairwise;
    } else {
      throw ConfigError("unknown admissibility rule '" + rule + "'");
    }
    c.alpha = j.value("alpha", c.alpha);
    c.prospective = j.value("prospective", c.prospective);
    if (j.contains("frontier") && !j.at("frontier").is_null()) {
      c.frontier = parse_date_or_throw(j.at("frontier").get<std::string>());
    }
    c.include_unknown = j.value("include_unknown", c.include_unknown);
    c.benjamini_hochberg = j.value("benjamini_hochberg", c.benjamini_hochberg);
    c.workers = j.value("workers", c.workers);
    c.top_n = j.value("top_n", c.top_n);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed screening config: ") + e.what());
  } catch (const QueryError& e) {
    throw ConfigError(std::string("malformed screening config: ") + e.what());
  }
}

ScreeningConfig ScreeningConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open screening config '" + path + "'");
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("screening config '" + path + "' is not valid JSON: " + e.what());
  }
}

std::vector<RegionSet> region_sets_for(const Schema& schema, const ScreeningConfig& config,
                                       const CentroidTable& centroids) {
  auto loc = location_dim_of(schema, config);
  if (!loc) return {};
  // Centroid keys match schema labels after normalization (case, accents, spacing).
  std::map<std::string, LatLon> by_key;
  for (const auto& [key, p] : centroids.entries()) by_key.emplace(normalize_label(key), p);
  std::map<std::string, LatLon> entries;
  for (std::size_t l = 0; l + 1 < schema.label_count(*loc); ++l) {
    const auto& label = schema.label(*loc, static_cast<LabelId>(l));
    auto it = by_key.find(normalize_label(label));
    if (it == by_key.end()) throw ConfigError("location '" + label + "' has no centroid");
    entries.emplace(label, it->second);
  }
  return enumerate_region_sets(CentroidTable(std::move(entries)), config.k_max, config.d_max_km, config.rule);
}

void enumerate_queries(const CountCube& cube, const ScreeningConfig& config, const std::vector<RegionSet>& regions,
                       const std::function<void(const ScreeningQuery&)>& visit) {
  const Plan plan = make_plan(cube, config, regions);
  WindowSet windows = all_windows(cube, config);
  if (config.prospective) {
    const Day frontier = config.frontier.value_or(cube.last_day());
    windows = WindowSet{cube.offset_of(frontier) - config.window_length + 1, 1, 1};
    if (windows.first - config.reference_length < 0 || frontier > cube.last_day()) windows.count = 0;
  }
  for (const auto& g : plan.groups) {
    for (std::size_t p = 0; p < g.probes(); ++p) {
      ScreeningQuery q;
      q.conjunction = g.nonspatial;
      if (!g.regions.empty()) q.region = plan.regions[g.regions[p]];
      for (int i = 0; i < windows.count; ++i) {
        q.window = DateWindow{cube.day_at(windows.at(i)), config.window_length};
        visit(q);
      }
    }
  }
}

std::vector<ScreeningQuery> enumerate_queries(const CountCube& cube, const ScreeningConfig& config,
                                              const std::vector<RegionSet>& regions) {
  std::vector<ScreeningQuery> out;
  enumerate_queries(cube, config, regions, [&](const ScreeningQuery& q) { out.push_back(q); });
  return out;
}

AnomalyReport score_query(const CountCube& cube, const ScreeningQuery& q, const ScreeningConfig& config) {
  const auto& schema = cube.schema();
  cube.check_window(q.window);
  const DateWindow reference{q.window.start - std::chrono::days{config.reference_length}, config.reference_length};
  cube.check_window(reference);

  ResolvedConjunction stratum = q.conjunction;
  ResolvedConjunction base;
  if (q.region) {
    auto loc = location_dim_of(schema, config);
    if (!loc) throw QueryError("query has a region but the schema has no location attribute");
    if (q.conjunction.find(*loc)) throw QueryError("query has both a region and a location term");
    stratum = with_term(q.conjunction, region_term(schema, *loc, *q.region));
    base = q.conjunction;
  }
  ContingencyTable t;
  t.a = cube.count(stratum, q.window);
  t.b = cube.count(stratum, reference);
  t.c = cube.count(base, q.window) - t.a;
  t.d = cube.count(base, reference) - t.b;

  auto r = run_test(t);
  AnomalyReport rep;
  rep.query = q;
  rep.observed = t.a;
  rep.expected = r.expected_a;
  rep.p_value = r.p_value;
  rep.test_used = r.test_used;
  rep.statistic = r.statistic;
  rep.table = t;
  return rep;
}

ScreenResult massive_screen(const CountCube& cube, const ScreeningConfig& config,
                            const std::vector<RegionSet>& regions) {
  if (config.prospective) return prospective_screen(cube, config, regions, config.frontier.value_or(cube.last_day()));
  const Plan plan = make_plan(cube, config, regions);
  return run_screen(cube, config, plan, all_windows(cube, config));
}

ScreenResult prospective_screen(const CountCube& cube, const ScreeningConfig& config,
                                const std::vector<RegionSet>& regions, Day frontier) {
  if (frontier < cube.first_day() || frontier > cube.last_day()) {
    throw QueryError("frontier " + format_date(frontier) + " lies outside the cube calendar");
  }
  const int first = cube.offset_of(frontier) - config.window_length + 1;
  if (first - config.reference_length < 0) {
    throw EmptyScreen("frontier " + format_date(frontier) + " leaves no room for the reference period");
  }
  const Plan plan = make_plan(cube, config, regions);
  return run_screen(cube, config, plan, WindowSet{first, 1, 1});
}

std::vector<TimelinePoint> pvalue_timeline(const CountCube& cube, const Conjunction& conjunction,
                                           const std::optional<RegionSet>& region, const ScreeningConfig& config) {
  const auto& schema = cube.schema();
  config.validate(schema);
  auto resolved = resolve(conjunction, schema);
  std::optional<RegionSet> effective = region;
  auto loc = location_dim_of(schema, config);
  if (loc) {
    auto it = std::find_if(resolved.terms.begin(), resolved.terms.end(), [&](const auto& t) { return t.dim == *loc; });
    if (it != resolved.terms.end()) {
      if (effective) throw QueryError("conjunction has a location term and a separate region");
      RegionSet r;
      for (auto l : it->labels) r.members.push_back(schema.label(*loc, l));
      r.seed = r.members.front();
      effective = std::move(r);
      resolved.terms.erase(it);
    }
  } else if (region) {
    throw QueryError("region given but the schema has no location attribute");
  }

  const ResolvedConjunction stratum_q =
      effective ? with_term(resolved, region_term(schema, *loc, *effective)) : resolved;
  const Series stratum = cube.compute_series(stratum_q);
  const Series base = effective ? cube.compute_series(resolved) : cube.compute_series({});
  const auto sp = stratum.prefix();
  const auto bp = base.prefix();
  const int len = config.window_length;
  const int ref = config.reference_length;

  std::vector<TimelinePoint> out;
  const WindowSet windows = all_windows(cube, config);
  for (int i = 0; i < windows.count; ++i) {
    const int f = windows.at(i);
    ContingencyTable t;
    t.a = sp[f + len] - sp[f];
    t.b = sp[f] - sp[f - ref];
    t.c = (bp[f + len] - bp[f]) - t.a;
    t.d = (bp[f] - bp[f - ref]) - t.b;
    auto r = run_test(t);
    out.push_back({DateWindow{cube.day_at(f), len}, t.a, r.expected_a, r.p_value, r.test_used});
  }
  return out;
}

}  // namespace tscreen
