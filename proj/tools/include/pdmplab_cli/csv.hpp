#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

namespace pdmplab::cli {

using CsvValue = std::variant<std::int64_t, std::uint64_t, double, std::string>;

// Deterministic CSV writing: doubles are printed with "%.17g" so re-running
// with the same inputs reproduces files byte for byte.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::vector<std::string> header);
  void row(const std::vector<CsvValue>& values);
  void close();

 private:
  std::ofstream out_;
  std::size_t width_;
};

std::string format_double(double v);

}  // namespace pdmplab::cli
