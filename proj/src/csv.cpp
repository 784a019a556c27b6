#include "tscreen/csv.hpp"

namespace tscreen::csv {

Reader::Reader(std::istream& in, char delimiter) : in_(in), delimiter_(delimiter) {}

std::optional<std::vector<std::string>> Reader::next() {
  while (true) {
    if (!in_.good() || in_.peek() == std::char_traits<char>::eof()) return std::nullopt;

    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool any = false;
    row_line_ = next_line_;

    int ch;
    while ((ch = in_.get()) != std::char_traits<char>::eof()) {
      char c = static_cast<char>(ch);
      any = true;
      if (in_quotes) {
        if (c == '"') {
          if (in_.peek() == '"') {
            in_.get();
            field.push_back('"');
          } else {
            in_quotes = false;
          }
        } else {
          if (c == '\n') ++next_line_;
          field.push_back(c);
        }
        continue;
      }
      if (c == '"') {
        in_quotes = true;
      } else if (c == delimiter_) {
        row.push_back(std::move(field));
        field.clear();
      } else if (c == '\n') {
        ++next_line_;
        break;
      } else if (c != '\r') {
        field.push_back(c);
      }
    }
    if (!any) return std::nullopt;
    row.push_back(std::move(field));
    if (row.size() == 1 && row[0].empty()) continue;  // blank line
    return row;
  }
}

std::string escape(std::string_view field, char delimiter) {
  bool needs = field.find_first_of(std::string{delimiter, '"', '\n', '\r'}) != std::string_view::npos;
  if (!needs) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string join(const std::vector<std::string>& fields, char delimiter) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(delimiter);
    out += escape(fields[i], delimiter);
  }
  return out;
}

}  // namespace tscreen::csv
