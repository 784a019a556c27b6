#include "tscreen/watch.hpp"

#include <algorithm>

#include "tscreen/errors.hpp"

namespace tscreen {

ProspectiveWatcher::ProspectiveWatcher(std::vector<EventRecord> history, Schema schema, ScreeningConfig config,
                                       std::vector<RegionSet> regions)
    : events_(std::move(history)), schema_(std::move(schema)), config_(std::move(config)), regions_(std::move(regions)) {
  config_.validate(schema_);
  if (const auto& range = schema_.date_range()) first_ = range->first;
  for (const auto& e : events_) {
    if (!first_ || e.date < *first_) first_ = e.date;
    if (!frontier_ || e.date > *frontier_) frontier_ = e.date;
  }
}

std::vector<Alert> ProspectiveWatcher::push(std::vector<EventRecord> batch) {
  std::vector<Alert> alerts;
  if (batch.empty()) return alerts;

  std::optional<Day> latest;
  for (const auto& e : batch) {
    if (!first_ || e.date < *first_) first_ = e.date;
    if (!latest || e.date > *latest) latest = e.date;
  }
  std::move(batch.begin(), batch.end(), std::back_inserter(events_));
  const auto previous = frontier_;
  if (previous && *latest <= *previous) return alerts;
  frontier_ = latest;

  auto schema = schema_;
  auto cube = CountCube::build(events_, std::move(schema), {}, std::pair{*first_, *frontier_});
  Day day = previous ? *previous + std::chrono::days{1} : *first_;
  for (; day <= *frontier_; day += std::chrono::days{1}) {
    try {
      auto result = prospective_screen(cube, config_, regions_, day);
      for (auto& r : result.reports) alerts.push_back({day, std::move(r)});
    } catch (const EmptyScreen&) {
      // Not enough history yet.
    }
  }
  return alerts;
}

}  // namespace tscreen
