#include "fbmsteer/csv.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>

namespace fbmsteer::io {

std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

CsvBuilder::CsvBuilder(std::vector<std::string> header) : columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) body_ += ',';
    body_ += header[i];
  }
  body_ += '\n';
}

void CsvBuilder::row(std::span<const double> values) {
  if (values.size() != columns_) throw std::invalid_argument("CsvBuilder: column count mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) body_ += ',';
    body_ += format_double(values[i]);
  }
  body_ += '\n';
}

void CsvBuilder::raw_row(std::span<const std::string> cells) {
  if (cells.size() != columns_) throw std::invalid_argument("CsvBuilder: column count mismatch");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) body_ += ',';
    body_ += cells[i];
  }
  body_ += '\n';
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace fbmsteer::io
