#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tscreen/cube.hpp"
#include "tscreen/ingest.hpp"
#include "tscreen/schema.hpp"
#include "tscreen/synthetic.hpp"

namespace tscreen::testing {

Day day(const char* iso);

/// date, age (default bins), state (14 departments, location), scene (3), perpetrator (4).
Schema small_schema();

/// Records with labels drawn from skewed categorical distributions (UNKNOWN
/// included) and dates uniform over [start, start + days).
std::vector<EventRecord> random_records(const Schema& schema, std::size_t n, Day start, int days, std::uint64_t seed);

/// Uniform null synthetic config over (state, scene, perpetrator).
SyntheticConfig null_config(Day start, Day end, double events_per_day, std::uint64_t seed);

/// A unique scratch directory under the system temp dir.
std::string scratch_dir(const std::string& tag);

std::string read_file(const std::string& path);

}  // namespace tscreen::testing
