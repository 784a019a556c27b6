#pragma once

#include <optional>
#include <vector>

#include "tscreen/cube.hpp"
#include "tscreen/geo.hpp"
#include "tscreen/ingest.hpp"
#include "tscreen/screen.hpp"

namespace tscreen {

struct Alert {
  Day frontier;
  AnomalyReport report;
};

/// Prospective screening over an append-only event stream. Each pushed batch
/// advances the frontier to its latest date; every newly reached frontier day
/// is screened once, using only data up to that day.
class ProspectiveWatcher {
 public:
  ProspectiveWatcher(std::vector<EventRecord> history, Schema schema, ScreeningConfig config,
                     std::vector<RegionSet> regions);

  /// Alerts for frontier days after the previous frontier, in day order.
  std::vector<Alert> push(std::vector<EventRecord> batch);

  std::optional<Day> frontier() const { return frontier_; }
  const Schema& schema() const { return schema_; }

 private:
  std::vector<EventRecord> events_;
  Schema schema_;
  ScreeningConfig config_;
  std::vector<RegionSet> regions_;
  std::optional<Day> first_;
  std::optional<Day> frontier_;
};

}  // namespace tscreen
