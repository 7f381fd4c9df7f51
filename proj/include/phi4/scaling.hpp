#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "phi4/coupling_set.hpp"
#include "phi4/data.hpp"
#include "phi4/trainer.hpp"

namespace phi4 {

struct CouplingMeans {
  double mean_w = 0;
  double mean_a = 0;
};

/// Means over the V(V-1)/2 pair weights and the V biases.
CouplingMeans coupling_means(const CouplingSetd& theta);

/// Power law |y| = prefactor * V^k fitted by least squares in log-log space.
struct FitResult {
  double exponent = 0;
  double prefactor = 0;
  double stderr_k = 0;  // NaN for a two-point fit
  double r_squared = 0;
  int sign = 1;  // common sign of the fitted y values
  std::vector<std::pair<double, double>> points;
};

FitResult powerlaw_fit(const std::vector<std::pair<double, double>>& points);

struct SubsetRule {
  enum class Kind { nested_alphabetical, nested_random };
  Kind kind = Kind::nested_alphabetical;
  int draws = 1;  // for nested_random; means are averaged over draws
};

struct ScalingPoint {
  Eigen::Index volume = 0;
  CouplingMeans means;
};

struct ScalingResult {
  std::vector<ScalingPoint> points;  // completed volumes, in order
  std::optional<FitResult> weights;
  std::optional<FitResult> biases;
  std::optional<std::string> failure;  // set when a volume failed; points keep the partial run
};

/// Trains a model on a sub-panel. Replaceable for tests.
using PanelTrainer = std::function<CouplingSetd(const ReturnPanel& subpanel, std::uint64_t seed)>;

/// Default trainer: `train` on the sub-panel's daily return vectors.
PanelTrainer default_panel_trainer(const TrainConfig& cfg);

/// Ticker subsets for each volume: nested, the largest first.
std::vector<std::vector<std::vector<std::string>>> choose_subsets(
    const std::vector<std::string>& tickers, const std::vector<Eigen::Index>& volumes,
    const SubsetRule& rule, std::uint64_t seed);

ScalingResult scaling_run(const ReturnPanel& panel, const std::vector<Eigen::Index>& volumes,
                          const SubsetRule& rule, const PanelTrainer& trainer, std::uint64_t seed,
                          unsigned threads = 1);

}  // namespace phi4
