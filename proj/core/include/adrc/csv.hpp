#pragma once

#include <string>
#include <vector>

namespace adrc {

/// Row-oriented CSV writer. Floating point values are written with 17
/// significant digits; files are written to a temporary sibling and renamed
/// into place once complete.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  void add_row(const std::vector<double>& values);
  void add_row_raw(const std::vector<std::string>& cells);
  void write(const std::string& path) const;

  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::string> rows_;
};

std::string format_double(double value);

/// Atomically replaces `path` with `contents` (write temp + rename).
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace adrc
