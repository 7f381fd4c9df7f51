#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace phi4 {

/// Close prices keyed by ticker, then ISO-8601 date.
struct PriceTable {
  std::map<std::string, std::map<std::string, double>> prices;

  /// Adds one observation; duplicate (ticker, date) keys are an InputError.
  void insert(const std::string& ticker, const std::string& date, double close);
  /// Moves every observation of `other` in; duplicates are an InputError.
  void merge(const PriceTable& other);
  bool empty() const { return prices.empty(); }
};

struct LongSchema {
  std::string date_col = "date";
  std::string ticker_col = "ticker";
  std::string close_col = "close";
};

/// Long format: one row per (date, ticker, close).
PriceTable ingest_csv(const std::filesystem::path& path, const LongSchema& schema = {});

/// Wide format: a date column followed by one close column per ticker. A
/// single column named `close` takes the file stem as its ticker.
PriceTable ingest_wide_csv(const std::filesystem::path& path, const std::string& date_col = "date");

/// Aligned daily log-returns; `returns` is dates x tickers.
struct ReturnPanel {
  std::vector<std::string> tickers;
  std::vector<std::string> dates;
  Eigen::MatrixXd returns;

  Eigen::Index days() const { return returns.rows(); }
  Eigen::Index size() const { return returns.cols(); }
  Eigen::Index column(const std::string& ticker) const;  // InputError if absent
  ReturnPanel select(const std::vector<std::string>& subset) const;
  ReturnPanel rows(Eigen::Index first, Eigen::Index count) const;
  void validate() const;
};

struct AlignmentReport {
  std::vector<std::string> dropped_dates;  // price dates missing for some ticker
};

/// ln(P_t / P_{t-1}) on the dates every ticker has a price for.
ReturnPanel log_returns(const PriceTable& table, AlignmentReport* report = nullptr);

/// Sign of each return, with 0 mapped to +1.
Eigen::VectorXd binarize(const Eigen::Ref<const Eigen::VectorXd>& series);
ReturnPanel binarize(const ReturnPanel& panel);

/// Trailing simple moving average; output length is len - window + 1.
Eigen::VectorXd sma(const Eigen::Ref<const Eigen::VectorXd>& series, Eigen::Index window);

/// Affine map of [min, max] of the series onto [target_min, target_max]. A
/// constant series maps to the midpoint.
Eigen::VectorXd minmax_rescale(const Eigen::Ref<const Eigen::VectorXd>& series, double target_min,
                               double target_max);

/// Reverse-chronological windows of one ticker's returns. Row k of `vectors`
/// is (r_i, r_{i-1}, ..., r_{i-W+1}) for anchor i = anchors[k]; anchors are
/// chronological and the newest usable day is always included.
struct WindowedDataset {
  Eigen::Index window = 0;
  Eigen::MatrixXd vectors;
  std::vector<Eigen::Index> anchors;
  std::vector<std::string> anchor_dates;
};

WindowedDataset build_windows(const Eigen::Ref<const Eigen::VectorXd>& series, Eigen::Index window,
                              Eigen::Index stride = 1,
                              std::optional<Eigen::Index> max_count = std::nullopt);
WindowedDataset build_windows(const ReturnPanel& panel, const std::string& ticker,
                              Eigen::Index window, Eigen::Index stride = 1,
                              std::optional<Eigen::Index> max_count = std::nullopt);

/// Per-column affine standardization (x - mean) / std.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static Standardizer fit(const Eigen::Ref<const Eigen::MatrixXd>& rows);
  static Standardizer identity(Eigen::Index columns);
  Eigen::MatrixXd apply(const Eigen::Ref<const Eigen::MatrixXd>& rows) const;
  double apply(Eigen::Index column, double x) const { return (x - mean(column)) / scale(column); }
  double invert(Eigen::Index column, double z) const { return mean(column) + scale(column) * z; }
};

/// True for a valid YYYY-MM-DD calendar date.
bool is_iso_date(const std::string& s);

}  // namespace phi4
