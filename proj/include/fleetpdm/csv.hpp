// Minimal strict CSV handling for the five fleet streams and the feature
// matrix. Fields never contain commas or quotes in these schemas, so no
// quoting/escaping layer is needed; the reader rejects anything that does
// not parse cleanly and always reports the offending line number.
#pragma once

#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fleetpdm {

class CsvError : public std::runtime_error {
 public:
  CsvError(const std::string& file, std::size_t line, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what),
        file_(file),
        line_(line) {}
  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

void split_csv_line(std::string_view line, std::vector<std::string>& out);

class CsvReader {
 public:
  // Opens `path` and checks that the header row equals `header` exactly.
  CsvReader(const std::string& path, const std::vector<std::string>& header);

  // Reads the next data row into `fields`; false at EOF. Lines starting
  // with '#' are skipped. Throws CsvError on a field-count mismatch.
  bool next_row(std::vector<std::string>& fields);

  std::size_t line() const { return line_; }
  const std::string& path() const { return path_; }

  [[noreturn]] void fail(const std::string& what) const { throw CsvError(path_, line_, what); }

 private:
  std::ifstream in_;
  std::string path_;
  std::size_t line_ = 0;
  std::size_t n_columns_ = 0;
  std::string buffer_;
};

// Strict scalar parsers: the whole token must be consumed.
bool parse_double_field(std::string_view text, double& out);
bool parse_long_field(std::string_view text, long& out);

}  // namespace fleetpdm
