#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace tscreen {

using Day = std::chrono::sys_days;

enum class DateFormat {
  kIso,       // YYYY-MM-DD
  kMonthDay,  // MM/DD/YYYY
  kDayMonth,  // DD/MM/YYYY
};

/// Parses a calendar day; returns nullopt for malformed or non-existent dates.
std::optional<Day> parse_date(std::string_view text, DateFormat format = DateFormat::kIso);

/// Like parse_date but throws ConfigError.
Day parse_date_or_throw(std::string_view text, DateFormat format = DateFormat::kIso);

std::string format_date(Day day, DateFormat format = DateFormat::kIso);

DateFormat parse_date_format(std::string_view name);
std::string_view date_format_name(DateFormat format);

inline int days_between(Day from, Day to) { return (to - from).count(); }

}  // namespace tscreen
