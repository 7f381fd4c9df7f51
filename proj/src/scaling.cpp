#include "phi4/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "phi4/errors.hpp"
#include "phi4/parallel.hpp"
#include "phi4/rng.hpp"

namespace phi4 {

CouplingMeans coupling_means(const CouplingSetd& theta) {
  const auto v = theta.volume();
  if (v < 2) throw InputError("coupling means need V >= 2");
  double sum_w = 0;
  for (Eigen::Index i = 0; i < v; ++i)
    for (Eigen::Index j = i + 1; j < v; ++j) sum_w += theta.weight(i, j);
  return {sum_w / static_cast<double>(theta.pair_count()), theta.bias().mean()};
}

FitResult powerlaw_fit(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) throw InputError("power-law fit needs at least two points");
  std::set<double> volumes;
  const int sign = points.front().second > 0 ? 1 : -1;
  for (const auto& [v, y] : points) {
    if (!(v > 0)) throw InputError("power-law fit needs positive volumes");
    if (!volumes.insert(v).second) throw InputError("power-law fit needs distinct volumes");
    if (y == 0 || !std::isfinite(y)) throw InputError("power-law fit needs finite nonzero values");
    if ((y > 0 ? 1 : -1) != sign) throw InputError("power-law fit values have mixed signs");
  }
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::VectorXd x(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i) = std::log(points[static_cast<std::size_t>(i)].first);
    y(i) = std::log(std::abs(points[static_cast<std::size_t>(i)].second));
  }
  const Eigen::ArrayXd dx = x.array() - x.mean();
  const Eigen::ArrayXd dy = y.array() - y.mean();
  const double sxx = dx.square().sum();
  const double k = (dx * dy).sum() / sxx;
  const double intercept = y.mean() - k * x.mean();
  const double ssr = (dy - k * dx).square().sum();
  const double sst = dy.square().sum();

  FitResult fit;
  fit.exponent = k;
  fit.prefactor = std::exp(intercept);
  fit.stderr_k = n > 2 ? std::sqrt(ssr / static_cast<double>(n - 2) / sxx)
                       : std::numeric_limits<double>::quiet_NaN();
  fit.r_squared = sst > 0 ? 1.0 - ssr / sst : 1.0;
  fit.sign = sign;
  fit.points = points;
  return fit;
}

PanelTrainer default_panel_trainer(const TrainConfig& cfg) {
  return [cfg](const ReturnPanel& sub, std::uint64_t seed) {
    TrainConfig c = cfg;
    c.seed = seed;
    return train(sub.returns, c).theta;
  };
}

std::vector<std::vector<std::vector<std::string>>> choose_subsets(
    const std::vector<std::string>& tickers, const std::vector<Eigen::Index>& volumes,
    const SubsetRule& rule, std::uint64_t seed) {
  for (std::size_t i = 0; i < volumes.size(); ++i) {
    if (volumes[i] < 2) throw InputError("volumes must be >= 2");
    if (i > 0 && volumes[i] <= volumes[i - 1]) throw InputError("volumes must be sorted and distinct");
  }
  if (volumes.empty() || static_cast<std::size_t>(volumes.back()) > tickers.size())
    throw InputError("panel has fewer tickers than the largest volume");

  std::vector<std::string> sorted = tickers;
  std::sort(sorted.begin(), sorted.end());
  const int draws = rule.kind == SubsetRule::Kind::nested_random ? std::max(1, rule.draws) : 1;
  std::vector<std::vector<std::string>> orders;
  for (int d = 0; d < draws; ++d) {
    auto order = sorted;
    if (rule.kind == SubsetRule::Kind::nested_random) {
      auto rng = make_rng(seed, {0x5b5e7, static_cast<std::uint64_t>(d)});
      std::shuffle(order.begin(), order.end(), rng);
    }
    orders.push_back(std::move(order));
  }
  std::vector<std::vector<std::vector<std::string>>> out;
  for (auto v : volumes) {
    std::vector<std::vector<std::string>> per_draw;
    for (const auto& order : orders) per_draw.emplace_back(order.begin(), order.begin() + v);
    out.push_back(std::move(per_draw));
  }
  return out;
}

ScalingResult scaling_run(const ReturnPanel& panel, const std::vector<Eigen::Index>& volumes,
                          const SubsetRule& rule, const PanelTrainer& trainer, std::uint64_t seed,
                          unsigned threads) {
  const auto subsets = choose_subsets(panel.tickers, volumes, rule, seed);
  struct Outcome {
    std::optional<CouplingMeans> means;
    std::string error;
  };
  std::vector<Outcome> outcomes(volumes.size());
  parallel_for(volumes.size(), threads, [&](std::size_t i) {
    try {
      CouplingMeans sum;
      const auto& draws = subsets[i];
      for (std::size_t d = 0; d < draws.size(); ++d) {
        const auto theta = trainer(panel.select(draws[d]),
                                   make_rng(seed, {0x5ca1e, static_cast<std::uint64_t>(volumes[i]), d})());
        const auto m = coupling_means(theta);
        sum.mean_w += m.mean_w / static_cast<double>(draws.size());
        sum.mean_a += m.mean_a / static_cast<double>(draws.size());
      }
      outcomes[i].means = sum;
    } catch (const std::exception& e) {
      outcomes[i].error = e.what();
    }
  });

  ScalingResult result;
  for (std::size_t i = 0; i < volumes.size(); ++i) {
    if (!outcomes[i].means) {
      result.failure = "training failed at V=" + std::to_string(volumes[i]) + ": " + outcomes[i].error;
      return result;
    }
    result.points.push_back({volumes[i], *outcomes[i].means});
  }
  std::vector<std::pair<double, double>> pw, pa;
  for (const auto& p : result.points) {
    pw.emplace_back(static_cast<double>(p.volume), p.means.mean_w);
    pa.emplace_back(static_cast<double>(p.volume), p.means.mean_a);
  }
  try {
    result.weights = powerlaw_fit(pw);
  } catch (const InputError& e) {
    result.failure = std::string("weights fit: ") + e.what();
  }
  try {
    result.biases = powerlaw_fit(pa);
  } catch (const InputError& e) {
    result.failure = std::string("bias fit: ") + e.what();
  }
  return result;
}

}  // namespace phi4
