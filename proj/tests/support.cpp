#include "support.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <unistd.h>

#include "tscreen/errors.hpp"

namespace tscreen::testing {

Day day(const char* iso) { return parse_date_or_throw(iso); }

Schema small_schema() {
  const Schema full = default_schema();
  std::vector<AttributeSpec> attrs;
  attrs.push_back({.name = "date", .kind = AttributeKind::kDate});
  AttributeSpec age{.name = "age", .kind = AttributeKind::kIntegerBinned};
  age.edges = default_age_edges();
  attrs.push_back(age);
  AttributeSpec state{.name = "state", .location = true};
  const auto& full_state = full.dimension(*full.location_dimension());
  state.labels.assign(full_state.labels.begin(), full_state.labels.end() - 1);
  attrs.push_back(state);
  attrs.push_back({.name = "scene", .labels = {"house", "street", "lot"}});
  attrs.push_back({.name = "perpetrator", .labels = {"boyfriend", "stranger", "father", "neighbour"}});
  return Schema(std::move(attrs));
}

std::vector<EventRecord> random_records(const Schema& schema, std::size_t n, Day start, int days, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> date(0, days - 1);
  std::vector<std::discrete_distribution<int>> dists;
  for (std::size_t d = 0; d < schema.dimension_count(); ++d) {
    std::vector<double> weights;
    for (std::size_t l = 0; l < schema.label_count(d); ++l) weights.push_back(1.0 / double(l + 1));
    dists.emplace_back(weights.begin(), weights.end());
  }
  const auto age_dim = schema.age_dimension();
  std::vector<EventRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    EventRecord r;
    r.date = start + std::chrono::days{date(rng)};
    for (std::size_t d = 0; d < schema.dimension_count(); ++d) r.values.push_back(static_cast<LabelId>(dists[d](rng)));
    if (age_dim && r.values[*age_dim] != schema.unknown_id(*age_dim)) {
      r.raw_age = schema.dimension(*age_dim).edges[r.values[*age_dim]];
    }
    out.push_back(std::move(r));
  }
  return out;
}

SyntheticConfig null_config(Day start, Day end, double events_per_day, std::uint64_t seed) {
  SyntheticConfig c;
  c.schema = small_schema();
  c.start = start;
  c.end = end;
  c.strata = uniform_strata(c.schema, {"state", "scene", "perpetrator"}, events_per_day);
  c.seed = seed;
  return c;
}

std::string scratch_dir(const std::string& tag) {
  static int counter = 0;
  auto dir = std::filesystem::temp_directory_path() /
             ("tscreen_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace tscreen::testing
