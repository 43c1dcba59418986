#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace fbmsteer::io {

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double v);

/// Builds a CSV document in memory (header row + numeric rows).
class CsvBuilder {
 public:
  explicit CsvBuilder(std::vector<std::string> header);

  void row(std::span<const double> values);
  /// Mixed row: pre-rendered cells.
  void raw_row(std::span<const std::string> cells);

  const std::string& str() const { return body_; }

 private:
  std::size_t columns_;
  std::string body_;
};

void write_file(const std::filesystem::path& path, const std::string& bytes);

}  // namespace fbmsteer::io
