#pragma once

#include <cstdint>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tscreen/conjunction.hpp"
#include "tscreen/date.hpp"
#include "tscreen/ingest.hpp"
#include "tscreen/schema.hpp"

namespace tscreen {

struct DateWindow {
  Day start;
  int length = 1;

  Day end() const { return start + std::chrono::days{length - 1}; }
  friend bool operator==(const DateWindow&, const DateWindow&) = default;
};

/// Prefix-summed daily counts over a dense calendar: prefix[i] is the number
/// of events strictly before calendar day i.
class Series {
 public:
  Series() = default;
  explicit Series(std::vector<std::uint32_t> prefix) : prefix_(std::move(prefix)) {}

  /// Events on calendar offsets [first, last].
  std::uint32_t range(int first, int last) const { return prefix_[last + 1] - prefix_[first]; }
  std::uint32_t daily(int offset) const { return range(offset, offset); }
  std::uint32_t total() const { return prefix_.empty() ? 0 : prefix_.back(); }
  int days() const { return prefix_.empty() ? 0 : static_cast<int>(prefix_.size()) - 1; }
  std::span<const std::uint32_t> prefix() const { return prefix_; }

  friend bool operator==(const Series&, const Series&) = default;

 private:
  std::vector<std::uint32_t> prefix_;
};

/// Which conjunctions are indexed at build time. Conjunctions over eager
/// attributes with at most `eager_max_terms` terms are answered from posting
/// lists; anything larger is computed by filtering the smallest posting list
/// and cached.
struct MaterializationPolicy {
  std::vector<std::string> eager_attributes;  // empty: every dimension
  int eager_max_terms = 2;                    // 1 or 2
  std::size_t cache_capacity = 4096;          // cached series before the cache is reset
};

struct CubeStats {
  std::uint64_t cache_hits = 0;
  std::uint64_t cache_misses = 0;
  std::uint64_t events_filtered = 0;  // events visited while computing series
};

struct TimelineEntry {
  DateWindow window;
  std::uint64_t count = 0;
};

/// Immutable count index over a dense day calendar. Copies share state;
/// concurrent readers are safe.
class CountCube {
 public:
  /// Calendar defaults to the schema's declared range, else the records' span.
  /// Throws BuildError for records outside the calendar or with invalid labels.
  static CountCube build(std::vector<EventRecord> records, Schema schema, MaterializationPolicy policy = {},
                         std::optional<std::pair<Day, Day>> calendar = std::nullopt);

  const Schema& schema() const;
  const MaterializationPolicy& policy() const;
  Day first_day() const;
  Day last_day() const;
  int calendar_days() const;
  std::size_t total_events() const;
  /// Events sorted by date (stable with respect to input order).
  std::span<const EventRecord> events() const;

  int offset_of(Day day) const { return days_between(first_day(), day); }
  Day day_at(int offset) const { return first_day() + std::chrono::days{offset}; }
  /// Throws QueryError if the window is empty or leaves the calendar.
  void check_window(const DateWindow& w) const;

  std::uint64_t count(const Conjunction& q, const DateWindow& w) const;
  std::uint64_t count(const ResolvedConjunction& q, const DateWindow& w) const;

  /// Daily series for q. Conjunctions beyond the eager policy are cached.
  std::shared_ptr<const Series> series(const ResolvedConjunction& q) const;
  /// Uncached computation of the same series.
  Series compute_series(const ResolvedConjunction& q) const;

  std::vector<TimelineEntry> timeline(const Conjunction& q, int window_length, int stride) const;

  CubeStats stats() const;

  /// Versioned binary snapshot (little-endian host layout).
  void save(std::ostream& out) const;
  static CountCube load(std::istream& in);
  void save_file(const std::string& path) const;
  static CountCube load_file(const std::string& path);

 private:
  struct Impl;
  explicit CountCube(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<Impl> impl_;
};

}  // namespace tscreen
