#include "tscreen/cube.hpp"

#include <algorithm>
#include <atomic>
#include <cstring>
#include <fstream>
#include <limits>
#include <mutex>
#include <unordered_map>

#include "tscreen/errors.hpp"

namespace tscreen {
namespace {

constexpr char kSnapshotMagic[8] = {'T', 'S', 'C', 'U', 'B', 'E', '0', '1'};
constexpr std::uint32_t kSnapshotVersion = 1;

using Posting = std::vector<std::uint32_t>;

std::uint64_t pair_key(std::size_t d1, LabelId l1, std::size_t d2, LabelId l2) {
  return (static_cast<std::uint64_t>(d1) << 48) | (static_cast<std::uint64_t>(l1) << 32) |
         (static_cast<std::uint64_t>(d2) << 16) | l2;
}

std::uint64_t in_range(const Posting& p, std::uint32_t lo, std::uint32_t hi) {
  auto a = std::lower_bound(p.begin(), p.end(), lo);
  auto b = std::lower_bound(a, p.end(), hi);
  return static_cast<std::uint64_t>(b - a);
}

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw BuildError("truncated cube snapshot");
  return v;
}

}  // namespace

struct CountCube::Impl {
  Schema schema;
  MaterializationPolicy policy;
  Day first;
  int days = 0;
  std::vector<EventRecord> events;
  std::vector<std::int32_t> offsets;      // calendar offset per event
  std::vector<LabelId> codes;             // events x dims
  std::vector<std::uint32_t> day_start;   // first event index at or after each offset; size days+1
  std::vector<bool> eager;                // per dimension
  std::vector<std::vector<Posting>> single;
  std::unordered_map<std::uint64_t, Posting> pairs;

  mutable std::mutex cache_mutex;
  mutable std::unordered_map<std::string, std::shared_ptr<const Series>> cache;
  mutable std::atomic<std::uint64_t> hits{0}, misses{0}, filtered{0};

  std::size_t dims() const { return schema.dimension_count(); }

  const Posting* pair_posting(std::size_t d1, LabelId l1, std::size_t d2, LabelId l2) const {
    static const Posting kEmpty;
    auto it = pairs.find(pair_key(d1, l1, d2, l2));
    return it == pairs.end() ? &kEmpty : &it->second;
  }

  bool fully_indexed(const ResolvedConjunction& q) const {
    if (static_cast<int>(q.size()) > policy.eager_max_terms) return false;
    return std::all_of(q.terms.begin(), q.terms.end(), [&](const auto& t) { return eager[t.dim]; });
  }

  // Posting lists whose union (disjoint) is the events matching `driver` terms.
  std::vector<const Posting*> postings_for(const std::vector<const ResolvedTerm*>& driver) const {
    std::vector<const Posting*> out;
    if (driver.size() == 1) {
      for (auto l : driver[0]->labels) out.push_back(&single[driver[0]->dim][l]);
    } else if (driver.size() == 2) {
      for (auto l1 : driver[0]->labels) {
        for (auto l2 : driver[1]->labels) out.push_back(pair_posting(driver[0]->dim, l1, driver[1]->dim, l2));
      }
    }
    return out;
  }

  static std::size_t total_size(const std::vector<const Posting*>& ps) {
    std::size_t n = 0;
    for (auto* p : ps) n += p->size();
    return n;
  }

  // Cheapest set of at most two eager terms to drive a filtered scan.
  std::vector<const ResolvedTerm*> choose_driver(const ResolvedConjunction& q) const {
    std::vector<const ResolvedTerm*> best;
    std::size_t best_cost = std::numeric_limits<std::size_t>::max();
    std::vector<const ResolvedTerm*> eligible;
    for (const auto& t : q.terms) {
      if (eager[t.dim]) eligible.push_back(&t);
    }
    for (std::size_t i = 0; i < eligible.size(); ++i) {
      std::vector<const ResolvedTerm*> cand{eligible[i]};
      auto cost = total_size(postings_for(cand));
      if (cost < best_cost) best_cost = cost, best = cand;
      if (policy.eager_max_terms < 2) continue;
      for (std::size_t j = i + 1; j < eligible.size(); ++j) {
        std::vector<const ResolvedTerm*> pair{eligible[i], eligible[j]};
        cost = total_size(postings_for(pair));
        if (cost < best_cost) best_cost = cost, best = pair;
      }
    }
    return best;
  }

  Series compute(const ResolvedConjunction& q) const {
    std::vector<std::uint32_t> daily(static_cast<std::size_t>(days) + 1, 0);
    if (q.size() == 0) return Series(day_start);

    auto driver = choose_driver(q);
    std::vector<const ResolvedTerm*> rest;
    for (const auto& t : q.terms) {
      if (std::find(driver.begin(), driver.end(), &t) == driver.end()) rest.push_back(&t);
    }
    auto accept = [&](std::uint32_t e) {
      const LabelId* row = &codes[static_cast<std::size_t>(e) * dims()];
      for (const auto* t : rest) {
        if (!std::binary_search(t->labels.begin(), t->labels.end(), row[t->dim])) return false;
      }
      return true;
    };
    std::uint64_t visited = 0;
    if (driver.empty()) {
      for (std::uint32_t e = 0; e < events.size(); ++e) {
        if (accept(e)) ++daily[offsets[e] + 1];
      }
      visited = events.size();
    } else {
      for (const auto* p : postings_for(driver)) {
        visited += p->size();
        if (rest.empty()) {
          for (auto e : *p) ++daily[offsets[e] + 1];
        } else {
          for (auto e : *p) {
            if (accept(e)) ++daily[offsets[e] + 1];
          }
        }
      }
    }
    filtered += visited;
    for (std::size_t i = 1; i < daily.size(); ++i) daily[i] += daily[i - 1];
    return Series(std::move(daily));
  }
};

CountCube CountCube::build(std::vector<EventRecord> records, Schema schema, MaterializationPolicy policy,
                           std::optional<std::pair<Day, Day>> calendar) {
  if (policy.eager_max_terms < 1 || policy.eager_max_terms > 2) {
    throw BuildError("eager_max_terms must be 1 or 2");
  }
  auto impl = std::make_shared<Impl>();
  const std::size_t dims = schema.dimension_count();
  if (dims > 0xFFFF) throw BuildError("too many dimensions");

  if (!calendar) calendar = schema.date_range();
  if (!calendar && !records.empty()) {
    auto [lo, hi] = std::minmax_element(records.begin(), records.end(),
                                        [](const auto& a, const auto& b) { return a.date < b.date; });
    calendar = std::pair{lo->date, hi->date};
  }
  if (calendar && calendar->first > calendar->second) throw BuildError("calendar start after end");
  if (records.size() >= std::numeric_limits<std::uint32_t>::max()) throw BuildError("too many events");

  impl->first = calendar ? calendar->first : Day{};
  impl->days = calendar ? days_between(calendar->first, calendar->second) + 1 : 0;

  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (!calendar || r.date < calendar->first || r.date > calendar->second) {
      throw BuildError("record " + std::to_string(i) + " dated " + format_date(r.date) + " lies outside the calendar");
    }
    if (r.values.size() != dims) throw BuildError("record " + std::to_string(i) + " has the wrong arity");
    for (std::size_t d = 0; d < dims; ++d) {
      if (r.values[d] >= schema.label_count(d)) {
        throw BuildError("record " + std::to_string(i) + " has an invalid label for '" + schema.dimension(d).name + "'");
      }
    }
  }
  std::stable_sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.date < b.date; });

  impl->eager.assign(dims, policy.eager_attributes.empty());
  for (const auto& name : policy.eager_attributes) impl->eager[schema.require_dimension(name)] = true;

  const auto n = records.size();
  impl->offsets.resize(n);
  impl->codes.resize(n * dims);
  impl->day_start.assign(static_cast<std::size_t>(impl->days) + 1, 0);
  impl->single.resize(dims);
  for (std::size_t d = 0; d < dims; ++d) impl->single[d].resize(schema.label_count(d));

  for (std::uint32_t e = 0; e < n; ++e) {
    const auto& r = records[e];
    const int off = days_between(impl->first, r.date);
    impl->offsets[e] = off;
    ++impl->day_start[off + 1];
    std::copy(r.values.begin(), r.values.end(), impl->codes.begin() + static_cast<std::ptrdiff_t>(e * dims));
    for (std::size_t d = 0; d < dims; ++d) {
      if (!impl->eager[d]) continue;
      impl->single[d][r.values[d]].push_back(e);
      if (policy.eager_max_terms < 2) continue;
      for (std::size_t d2 = d + 1; d2 < dims; ++d2) {
        if (impl->eager[d2]) impl->pairs[pair_key(d, r.values[d], d2, r.values[d2])].push_back(e);
      }
    }
  }
  for (std::size_t i = 1; i < impl->day_start.size(); ++i) impl->day_start[i] += impl->day_start[i - 1];

  impl->events = std::move(records);
  impl->schema = std::move(schema);
  impl->policy = std::move(policy);
  return CountCube(std::move(impl));
}

const Schema& CountCube::schema() const { return impl_->schema; }
const MaterializationPolicy& CountCube::policy() const { return impl_->policy; }
Day CountCube::first_day() const { return impl_->first; }
Day CountCube::last_day() const { return impl_->first + std::chrono::days{impl_->days - 1}; }
int CountCube::calendar_days() const { return impl_->days; }
std::size_t CountCube::total_events() const { return impl_->events.size(); }
std::span<const EventRecord> CountCube::events() const { return impl_->events; }

void CountCube::check_window(const DateWindow& w) const {
  if (w.length < 1) throw QueryError("window length must be at least 1 day");
  if (impl_->days == 0 || w.start < first_day() || w.end() > last_day()) {
    throw QueryError("window " + format_date(w.start) + " + " + std::to_string(w.length) +
                     " days lies outside the cube calendar");
  }
}

std::uint64_t CountCube::count(const Conjunction& q, const DateWindow& w) const {
  return count(resolve(q, impl_->schema), w);
}

std::uint64_t CountCube::count(const ResolvedConjunction& q, const DateWindow& w) const {
  check_window(w);
  const int first = offset_of(w.start);
  const int last = first + w.length - 1;
  const auto lo = impl_->day_start[first];
  const auto hi = impl_->day_start[last + 1];
  if (q.size() == 0) return hi - lo;
  if (impl_->fully_indexed(q)) {
    std::vector<const ResolvedTerm*> driver;
    for (const auto& t : q.terms) driver.push_back(&t);
    std::uint64_t n = 0;
    for (const auto* p : impl_->postings_for(driver)) n += in_range(*p, lo, hi);
    return n;
  }
  return series(q)->range(first, last);
}

std::shared_ptr<const Series> CountCube::series(const ResolvedConjunction& q) const {
  if (q.size() == 0 || impl_->fully_indexed(q)) return std::make_shared<const Series>(impl_->compute(q));
  auto key = q.key();
  {
    std::lock_guard lock(impl_->cache_mutex);
    auto it = impl_->cache.find(key);
    if (it != impl_->cache.end()) {
      ++impl_->hits;
      return it->second;
    }
  }
  ++impl_->misses;
  // Computed outside the lock; a concurrent duplicate yields an identical series.
  auto s = std::make_shared<const Series>(impl_->compute(q));
  std::lock_guard lock(impl_->cache_mutex);
  if (impl_->cache.size() >= impl_->policy.cache_capacity) impl_->cache.clear();
  impl_->cache.emplace(std::move(key), s);
  return s;
}

Series CountCube::compute_series(const ResolvedConjunction& q) const { return impl_->compute(q); }

std::vector<TimelineEntry> CountCube::timeline(const Conjunction& q, int window_length, int stride) const {
  if (stride < 1) throw QueryError("stride must be at least 1");
  if (window_length < 1) throw QueryError("window length must be at least 1 day");
  auto resolved = resolve(q, impl_->schema);
  auto s = series(resolved);
  std::vector<TimelineEntry> out;
  for (int first = 0; first + window_length <= impl_->days; first += stride) {
    out.push_back({DateWindow{day_at(first), window_length}, s->range(first, first + window_length - 1)});
  }
  return out;
}

CubeStats CountCube::stats() const {
  return {impl_->hits.load(), impl_->misses.load(), impl_->filtered.load()};
}

void CountCube::save(std::ostream& out) const {
  out.write(kSnapshotMagic, sizeof kSnapshotMagic);
  write_pod(out, kSnapshotVersion);

  nlohmann::json meta;
  meta["schema"] = impl_->schema.to_json();
  meta["policy"] = {{"eager_attributes", impl_->policy.eager_attributes},
                    {"eager_max_terms", impl_->policy.eager_max_terms},
                    {"cache_capacity", impl_->policy.cache_capacity}};
  meta["first_day"] = format_date(impl_->first);
  meta["days"] = impl_->days;
  auto text = meta.dump();
  write_pod(out, static_cast<std::uint64_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));

  const std::size_t dims = impl_->dims();
  write_pod(out, static_cast<std::uint64_t>(impl_->events.size()));
  for (std::size_t e = 0; e < impl_->events.size(); ++e) {
    const auto& r = impl_->events[e];
    write_pod(out, static_cast<std::int32_t>(impl_->offsets[e]));
    write_pod(out, static_cast<std::int32_t>(r.raw_age.value_or(-1)));
    out.write(reinterpret_cast<const char*>(r.values.data()), static_cast<std::streamsize>(dims * sizeof(LabelId)));
  }
  if (!out) throw BuildError("failed to write cube snapshot");
}

CountCube CountCube::load(std::istream& in) {
  char magic[sizeof kSnapshotMagic];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kSnapshotMagic, sizeof magic) != 0) throw BuildError("not a cube snapshot");
  if (read_pod<std::uint32_t>(in) != kSnapshotVersion) throw BuildError("unsupported cube snapshot version");

  auto len = read_pod<std::uint64_t>(in);
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw BuildError("truncated cube snapshot");
  auto meta = nlohmann::json::parse(text);
  auto schema = Schema::from_json(meta.at("schema"));
  MaterializationPolicy policy;
  policy.eager_attributes = meta.at("policy").at("eager_attributes").get<std::vector<std::string>>();
  policy.eager_max_terms = meta.at("policy").at("eager_max_terms").get<int>();
  policy.cache_capacity = meta.at("policy").at("cache_capacity").get<std::size_t>();
  const Day first = parse_date_or_throw(meta.at("first_day").get<std::string>());
  const int days = meta.at("days").get<int>();

  const std::size_t dims = schema.dimension_count();
  auto n = read_pod<std::uint64_t>(in);
  std::vector<EventRecord> records;
  records.reserve(n);
  for (std::uint64_t e = 0; e < n; ++e) {
    EventRecord r;
    r.date = first + std::chrono::days{read_pod<std::int32_t>(in)};
    auto age = read_pod<std::int32_t>(in);
    if (age >= 0) r.raw_age = age;
    r.values.resize(dims);
    in.read(reinterpret_cast<char*>(r.values.data()), static_cast<std::streamsize>(dims * sizeof(LabelId)));
    if (!in) throw BuildError("truncated cube snapshot");
    records.push_back(std::move(r));
  }
  std::optional<std::pair<Day, Day>> calendar;
  if (days > 0) calendar = std::pair{first, first + std::chrono::days{days - 1}};
  return build(std::move(records), std::move(schema), std::move(policy), calendar);
}

void CountCube::save_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw BuildError("cannot write cube snapshot '" + path + "'");
  save(out);
}

CountCube CountCube::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw BuildError("cannot open cube snapshot '" + path + "'");
  return load(in);
}

}  // namespace tscreen
