#pragma once

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tscreen::csv {

/// RFC 4180-style reader: quoted fields may contain delimiters, doubled
/// quotes and line breaks. Tracks the physical line where each row starts.
class Reader {
 public:
  explicit Reader(std::istream& in, char delimiter = ',');

  /// Next row, or nullopt at end of input. Blank lines are skipped.
  std::optional<std::vector<std::string>> next();

  /// 1-based physical line number of the row most recently returned.
  std::size_t line() const { return row_line_; }

 private:
  std::istream& in_;
  char delimiter_;
  std::size_t next_line_ = 1;
  std::size_t row_line_ = 0;
};

std::string escape(std::string_view field, char delimiter = ',');
std::string join(const std::vector<std::string>& fields, char delimiter = ',');

}  // namespace tscreen::csv
