#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "phi4/checkpoint.hpp"
#include "phi4/sampler.hpp"
#include "phi4/trainer.hpp"

namespace phi4 {

/// Posterior summary of one predicted return, in return units.
struct Prediction {
  double mean = 0;
  double q05 = 0;
  double q50 = 0;
  double q95 = 0;
  double stddev = 0;
  double standard_error = 0;
};

/// Samples p(target | all other stocks) with the observed returns clamped.
/// `observed` must name exactly the model's tickers other than `target`.
Prediction impute(const Model& model, const std::string& target,
                  const std::map<std::string, double>& observed, const SamplerConfig& cfg,
                  std::uint64_t seed, int chains = 1);

/// R = (sigma_target / 2) (phi_a / sigma_a + phi_b / sigma_b).
double rescaled_mean_baseline(double phi_a, double phi_b, double sigma_a, double sigma_b,
                              double sigma_target);

/// Same average over any number of predictor stocks.
double rescaled_mean_baseline(std::span<const double> observed, std::span<const double> sigmas,
                              double sigma_target);

/// Training settings for W-dimensional window models. The pair moments of
/// train_window - W + 1 overlapping windows are rank deficient when that count
/// is below W, so weights are decayed toward zero.
inline TrainConfig default_forecast_training() {
  TrainConfig t;
  t.learning_rate = 0.05;
  t.epochs = 400;
  t.chains = 4;
  t.sampler = SamplerConfig{0.5, 50, 1, 4, 0.44};
  t.init.lambda_init = 0.05;
  t.l2_weight_decay = 1.0;
  t.averaging_fraction = 0.5;
  return t;
}

struct ForecastConfig {
  Eigen::Index window = 150;        // sites per training vector
  Eigen::Index train_window = 230;  // trailing returns used per training run
  Eigen::Index stride = 1;
  Eigen::Index retrain_every = 1;   // days between retrainings
  bool standardize = true;          // z-score with the training window's mean and std
  TrainConfig train = default_forecast_training();
  SamplerConfig sampler{0.5, 500, 2, 2000, 0.44};
  int sampling_chains = 1;
  std::uint64_t seed = 1;
  unsigned threads = 0;

  void validate() const;
};

/// Forecast of returns[index] from returns[0 .. index-1].
struct DayForecast {
  Eigen::Index index = 0;
  double truth = 0;
  Prediction phi4;
  bool ok = true;
  std::string note;  // why the day was skipped
};

/// Walk-forward one-day-ahead forecasts for each target index. A model is
/// trained on the train_window returns preceding the first day of each
/// retraining block; site 0 is then sampled with sites 1..W-1 clamped to the
/// most recent W-1 returns.
std::vector<DayForecast> next_day_forecast(const Eigen::Ref<const Eigen::VectorXd>& returns,
                                           const std::vector<Eigen::Index>& targets,
                                           const ForecastConfig& cfg);

/// One-day forecast from a model trained on windows of `history` (all of it
/// is treated as the past). Exposed for causality tests.
DayForecast forecast_from_history(const Eigen::Ref<const Eigen::VectorXd>& training_returns,
                                  const Eigen::Ref<const Eigen::VectorXd>& history,
                                  const ForecastConfig& cfg, std::uint64_t train_seed,
                                  std::uint64_t sample_seed);

/// AR(p) least-squares prediction of the next value after `history`, fitted
/// on its last `window` rows. NaN when the design matrix is rank deficient.
double linreg_predict(const Eigen::Ref<const Eigen::VectorXd>& history, Eigen::Index window,
                      Eigen::Index lags);

struct LinregResult {
  Eigen::Index window = 0;
  double mae = 0;                // over days with a prediction
  Eigen::VectorXd predictions;   // one per target, NaN when singular
  Eigen::Index singular_days = 0;
};

/// Walk-forward rolling OLS of r_t on (1, r_{t-1}, ..., r_{t-p}) for each
/// window size, evaluated on the same target days.
std::vector<LinregResult> rolling_linreg_baseline(const Eigen::Ref<const Eigen::VectorXd>& returns,
                                                  const std::vector<Eigen::Index>& windows,
                                                  Eigen::Index lags,
                                                  const std::vector<Eigen::Index>& targets);

}  // namespace phi4
