#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "phi4/io.hpp"
#include "phi4/rng.hpp"

namespace testutil {

// Removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("phi4_test_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path file(const std::string& name, const std::string& contents) const {
    const auto p = path_ / name;
    std::ofstream(p, std::ios::binary) << contents;
    return p;
  }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string fixture(const std::string& name) { return std::string(PHI4_FIXTURE_DIR) + "/" + name; }

// Common Student-t factor plus idiosyncratic noise with a positive drift.
inline std::filesystem::path synthetic_panel(const TempDir& dir, int tickers, int days, std::uint64_t seed) {
  auto rng = phi4::make_rng(seed);
  std::student_t_distribution<double> t(5.0);
  phi4::ReturnPanel p;
  for (int i = 0; i < tickers; ++i) p.tickers.push_back("T" + std::to_string(10 + i));
  p.returns.resize(days, tickers);
  for (int d = 0; d < days; ++d) {
    const double f = t(rng);
    for (int i = 0; i < tickers; ++i) p.returns(d, i) = 0.003 + 0.006 * f + 0.008 * t(rng);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", 2000 + d / 336, 1 + (d / 28) % 12, 1 + d % 28);
    p.dates.emplace_back(buf);
  }
  const auto path = dir / ("panel" + std::to_string(tickers) + ".csv");
  std::ofstream os(path);
  phi4::write_panel_csv(os, p, phi4::Provenance{"synthetic", seed, ""});
  return path;
}

}  // namespace testutil
