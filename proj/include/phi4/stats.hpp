#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "phi4/data.hpp"

namespace phi4 {

/// Cross-sectional mean over tickers, one market return per date.
Eigen::VectorXd market_series(const ReturnPanel& panel);

/// Pearson (non-excess) kurtosis m4 / m2^2 with population moments about the
/// sample mean. NaN when the variance is zero.
double pearson_kurtosis(const Eigen::Ref<const Eigen::VectorXd>& x);

/// Kurtosis of each trailing window; output length len - window + 1.
Eigen::VectorXd rolling_kurtosis(const Eigen::Ref<const Eigen::VectorXd>& series,
                                 Eigen::Index window = 250);

/// Kurtosis of all tickers' returns pooled over each trailing window of dates.
Eigen::VectorXd rolling_pooled_kurtosis(const ReturnPanel& panel, Eigen::Index window = 250);

double mae(const Eigen::Ref<const Eigen::VectorXd>& pred, const Eigen::Ref<const Eigen::VectorXd>& truth);

enum class KurtosisMode { market, pooled };

/// Rolling market statistics of one panel, labelled by source.
struct MarketStatistics {
  std::string label;
  std::vector<std::string> dates;  // date of each window's last day
  Eigen::VectorXd mean_sma;
  Eigen::VectorXd kurtosis;
};

MarketStatistics market_statistics(const ReturnPanel& panel, const std::string& label,
                                   Eigen::Index window = 250,
                                   KurtosisMode mode = KurtosisMode::market);

}  // namespace phi4
