#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "phi4/data.hpp"

namespace phi4 {

inline constexpr std::string_view kToolVersion = "0.1.0";

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row
};

/// Reads a comma-separated file with a header row. Lines starting with '#'
/// and blank lines are skipped. Every row must match the header width.
CsvTable read_csv(const std::filesystem::path& path);
std::vector<std::string> split_csv_line(std::string_view line);

/// 17 significant digits; NaN prints as NA.
std::string format_double(double x);
double parse_double(const std::string& field, const std::string& context);

std::string read_file(const std::filesystem::path& path);
std::string sha256_hex(std::string_view bytes);

/// First line of every output file.
struct Provenance {
  std::string command;
  std::uint64_t seed = 0;
  std::string inputs_sha256;

  std::string header_line() const;  // "# phi4 0.1.0 | command=... | seed=... | inputs_sha256=..."
};

/// Checksum over the contents of every input file, in the given order.
std::string inputs_checksum(const std::vector<std::filesystem::path>& inputs);

void write_panel_csv(std::ostream& os, const ReturnPanel& panel, const Provenance& meta);
ReturnPanel read_panel_csv(const std::filesystem::path& path);

}  // namespace phi4
