#include "tscreen/date.hpp"

#include <charconv>
#include <cstdio>

#include "tscreen/errors.hpp"

namespace tscreen {
namespace {

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

std::optional<Day> make_day(int y, int m, int d) {
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                  std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return Day{ymd};
}

}  // namespace

std::optional<Day> parse_date(std::string_view text, DateFormat format) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);

  char sep = format == DateFormat::kIso ? '-' : '/';
  auto first = text.find(sep);
  if (first == std::string_view::npos) return std::nullopt;
  auto second = text.find(sep, first + 1);
  if (second == std::string_view::npos) return std::nullopt;

  int p0 = 0, p1 = 0, p2 = 0;
  auto s0 = text.substr(0, first);
  auto s1 = text.substr(first + 1, second - first - 1);
  auto s2 = text.substr(second + 1);
  if (!parse_int(s0, p0) || !parse_int(s1, p1) || !parse_int(s2, p2)) return std::nullopt;

  switch (format) {
    case DateFormat::kIso:
      if (s0.size() != 4) return std::nullopt;
      return make_day(p0, p1, p2);
    case DateFormat::kMonthDay:
      if (s2.size() != 4) return std::nullopt;
      return make_day(p2, p0, p1);
    case DateFormat::kDayMonth:
      if (s2.size() != 4) return std::nullopt;
      return make_day(p2, p1, p0);
  }
  return std::nullopt;
}

Day parse_date_or_throw(std::string_view text, DateFormat format) {
  auto d = parse_date(text, format);
  if (!d) throw ConfigError("invalid date '" + std::string(text) + "'");
  return *d;
}

std::string format_date(Day day, DateFormat format) {
  std::chrono::year_month_day ymd{day};
  int y = static_cast<int>(ymd.year());
  unsigned m = static_cast<unsigned>(ymd.month());
  unsigned d = static_cast<unsigned>(ymd.day());
  char buf[16];
  switch (format) {
    case DateFormat::kIso:
      std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", y, m, d);
      break;
    case DateFormat::kMonthDay:
      std::snprintf(buf, sizeof buf, "%02u/%02u/%04d", m, d, y);
      break;
    case DateFormat::kDayMonth:
      std::snprintf(buf, sizeof buf, "%02u/%02u/%04d", d, m, y);
      break;
  }
  return buf;
}

DateFormat parse_date_format(std::string_view name) {
  if (name == "YYYY-MM-DD" || name == "iso") return DateFormat::kIso;
  if (name == "MM/DD/YYYY") return DateFormat::kMonthDay;
  if (name == "DD/MM/YYYY") return DateFormat::kDayMonth;
  throw ConfigError("unknown date format '" + std::string(name) + "'");
}

std::string_view date_format_name(DateFormat format) {
  switch (format) {
    case DateFormat::kIso: return "YYYY-MM-DD";
    case DateFormat::kMonthDay: return "MM/DD/YYYY";
    case DateFormat::kDayMonth: return "DD/MM/YYYY";
  }
  return "YYYY-MM-DD";
}

}  // namespace tscreen
