#include "phi4/stats.hpp"

#include <cmath>
#include <limits>

#include "phi4/errors.hpp"

namespace phi4 {

Eigen::VectorXd market_series(const ReturnPanel& panel) {
  if (panel.days() == 0 || panel.size() == 0) throw InputError("market series of an empty panel");
  return panel.returns.rowwise().mean();
}

double pearson_kurtosis(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const Eigen::ArrayXd d = x.array() - x.mean();
  const Eigen::ArrayXd d2 = d.square();
  const double m2 = d2.mean();
  if (!(m2 > 0)) return std::numeric_limits<double>::quiet_NaN();
  return d2.square().mean() / (m2 * m2);
}

Eigen::VectorXd rolling_kurtosis(const Eigen::Ref<const Eigen::VectorXd>& series, Eigen::Index window) {
  if (window < 4) throw InputError("kurtosis window must be >= 4");
  if (window > series.size()) throw InputError("kurtosis window longer than the series");
  Eigen::VectorXd out(series.size() - window + 1);
  for (Eigen::Index i = 0; i < out.size(); ++i) out(i) = pearson_kurtosis(series.segment(i, window));
  return out;
}

Eigen::VectorXd rolling_pooled_kurtosis(const ReturnPanel& panel, Eigen::Index window) {
  if (window < 1 || window * panel.size() < 4) throw InputError("pooled kurtosis window too small");
  if (window > panel.days()) throw InputError("kurtosis window longer than the panel");
  Eigen::VectorXd out(panel.days() - window + 1);
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const Eigen::MatrixXd block = panel.returns.middleRows(i, window);
    out(i) = pearson_kurtosis(Eigen::Map<const Eigen::VectorXd>(block.data(), block.size()));
  }
  return out;
}

double mae(const Eigen::Ref<const Eigen::VectorXd>& pred, const Eigen::Ref<const Eigen::VectorXd>& truth) {
  if (pred.size() != truth.size()) throw InputError("mae: length mismatch");
  if (pred.size() == 0) throw InputError("mae: empty series");
  return (pred - truth).cwiseAbs().mean();
}

MarketStatistics market_statistics(const ReturnPanel& panel, const std::string& label,
                                   Eigen::Index window, KurtosisMode mode) {
  const Eigen::VectorXd market = market_series(panel);
  MarketStatistics s;
  s.label = label;
  s.mean_sma = sma(market, window);
  s.kurtosis = mode == KurtosisMode::market ? rolling_kurtosis(market, window)
                                            : rolling_pooled_kurtosis(panel, window);
  s.dates.assign(panel.dates.begin() + (window - 1), panel.dates.end());
  return s;
}

}  // namespace phi4
