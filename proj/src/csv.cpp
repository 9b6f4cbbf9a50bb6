#include "fleetpdm/csv.hpp"

#include <charconv>

namespace fleetpdm {

void split_csv_line(std::string_view line, std::vector<std::string>& out) {
  out.clear();
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      return;
    }
    out.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

CsvReader::CsvReader(const std::string& path, const std::vector<std::string>& header)
    : in_(path), path_(path) {
  if (!in_) throw CsvError(path, 0, "cannot open file");
  // The header is the first non-comment line.
  while (true) {
    if (!std::getline(in_, buffer_)) throw CsvError(path, line_ + 1, "missing header row");
    ++line_;
    if (!buffer_.empty() && buffer_.back() == '\r') buffer_.pop_back();
    if (!buffer_.empty() && buffer_[0] != '#') break;
  }
  std::vector<std::string> fields;
  split_csv_line(buffer_, fields);
  if (fields != header) {
    std::string expected;
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i) expected += ',';
      expected += header[i];
    }
    throw CsvError(path, 1, "header mismatch: expected \"" + expected + "\", got \"" + buffer_ + "\"");
  }
  n_columns_ = header.size();
}

bool CsvReader::next_row(std::vector<std::string>& fields) {
  while (std::getline(in_, buffer_)) {
    ++line_;
    if (!buffer_.empty() && buffer_.back() == '\r') buffer_.pop_back();
    if (buffer_.empty()) continue;
    if (buffer_[0] == '#') continue;
    split_csv_line(buffer_, fields);
    if (fields.size() != n_columns_) {
      fail("expected " + std::to_string(n_columns_) + " fields, got " +
           std::to_string(fields.size()));
    }
    return true;
  }
  return false;
}

bool parse_double_field(std::string_view text, double& out) {
  if (text.empty()) return false;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

bool parse_long_field(std::string_view text, long& out) {
  if (text.empty()) return false;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace fleetpdm
