#include "phi4/forecast.hpp"

#include <cmath>
#include <limits>

#include "phi4/data.hpp"
#include "phi4/errors.hpp"
#include "phi4/parallel.hpp"
#include "phi4/stats.hpp"

namespace phi4 {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Prediction to_prediction(const Posterior& post, Eigen::Index m, double center, double scale) {
  return {center + scale * post.mean(m),     center + scale * post.q05(m),
          center + scale * post.q50(m),      center + scale * post.q95(m),
          scale * post.stddev(m),            scale * post.standard_error(m)};
}

}  // namespace

Prediction impute(const Model& model, const std::string& target,
                  const std::map<std::string, double>& observed, const SamplerConfig& cfg,
                  std::uint64_t seed, int chains) {
  const auto v = model.theta.volume();
  Eigen::Index target_site = -1;
  Clamp clamp = Clamp::none(v);
  for (Eigen::Index i = 0; i < v; ++i) {
    const auto& ticker = model.tickers[static_cast<std::size_t>(i)];
    if (ticker == target) {
      target_site = i;
      if (observed.count(ticker)) throw InputError("target '" + target + "' is also observed");
      continue;
    }
    const auto it = observed.find(ticker);
    if (it == observed.end()) throw InputError("missing observed value for '" + ticker + "'");
    clamp.mask[static_cast<std::size_t>(i)] = true;
    clamp.values(i) = model.standardizer ? model.standardizer->apply(i, it->second) : it->second;
  }
  if (target_site < 0) throw InputError("target '" + target + "' is not a model ticker");
  if (static_cast<Eigen::Index>(observed.size()) != v - 1)
    throw InputError("observed values name tickers outside the model");

  const auto post = conditional_mean(model.theta, cfg, clamp, seed, chains, 1);
  const double center = model.standardizer ? model.standardizer->mean(target_site) : 0.0;
  const double scale = model.standardizer ? model.standardizer->scale(target_site) : 1.0;
  return to_prediction(post, 0, center, scale);
}

double rescaled_mean_baseline(double phi_a, double phi_b, double sigma_a, double sigma_b,
                              double sigma_target) {
  const double obs[] = {phi_a, phi_b};
  const double sig[] = {sigma_a, sigma_b};
  return rescaled_mean_baseline(obs, sig, sigma_target);
}

double rescaled_mean_baseline(std::span<const double> observed, std::span<const double> sigmas,
                              double sigma_target) {
  if (observed.size() != sigmas.size() || observed.empty())
    throw InputError("rescaled mean needs one sigma per observed stock");
  if (!(sigma_target > 0)) throw InputError("sigma must be positive");
  double sum = 0;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    if (!(sigmas[k] > 0)) throw InputError("sigma must be positive");
    sum += observed[k] / sigmas[k];
  }
  return sigma_target / static_cast<double>(observed.size()) * sum;
}

void ForecastConfig::validate() const {
  if (window < 2) throw InputError("forecast window must be >= 2");
  if (train_window < window) throw InputError("train_window must be >= window");
  if (stride < 1 || retrain_every < 1) throw InputError("stride and retrain_every must be >= 1");
  if (sampling_chains < 1) throw InputError("sampling_chains must be >= 1");
  train.validate();
  sampler.validate();
}

namespace {

struct ForecastModel {
  CouplingSetd theta;
  Standardizer z;
};

ForecastModel fit_forecast_model(const Eigen::Ref<const Eigen::VectorXd>& training,
                                 const ForecastConfig& cfg, std::uint64_t seed, unsigned threads) {
  ForecastModel m{{}, Standardizer::identity(1)};
  if (cfg.standardize) m.z = Standardizer::fit(training);
  const auto ds = build_windows(training, cfg.window, cfg.stride);
  const Eigen::MatrixXd data = ((ds.vectors.array() - m.z.mean(0)) / m.z.scale(0)).matrix();
  TrainConfig tc = cfg.train;
  tc.seed = seed;
  tc.threads = threads;
  m.theta = train(data, tc).theta;
  return m;
}

// Samples site 0 with sites 1..W-1 clamped to the newest W-1 entries of history.
Prediction predict_next(const ForecastModel& m, const Eigen::Ref<const Eigen::VectorXd>& history,
                        const ForecastConfig& cfg, std::uint64_t seed) {
  const auto w = cfg.window;
  if (history.size() < w - 1) throw InputError("history shorter than the conditioning window");
  Clamp clamp = Clamp::none(w);
  for (Eigen::Index k = 1; k < w; ++k) {
    clamp.mask[static_cast<std::size_t>(k)] = true;
    clamp.values(k) = m.z.apply(0, history(history.size() - k));
  }
  const auto post = conditional_mean(m.theta, cfg.sampler, clamp, seed, cfg.sampling_chains, 1);
  return to_prediction(post, 0, m.z.mean(0), m.z.scale(0));
}

}  // namespace

DayForecast forecast_from_history(const Eigen::Ref<const Eigen::VectorXd>& training_returns,
                                  const Eigen::Ref<const Eigen::VectorXd>& history,
                                  const ForecastConfig& cfg, std::uint64_t train_seed,
                                  std::uint64_t sample_seed) {
  cfg.validate();
  const auto model = fit_forecast_model(training_returns, cfg, train_seed, cfg.threads);
  DayForecast day;
  day.index = history.size();
  day.truth = kNaN;
  day.phi4 = predict_next(model, history, cfg, sample_seed);
  return day;
}

std::vector<DayForecast> next_day_forecast(const Eigen::Ref<const Eigen::VectorXd>& returns,
                                           const std::vector<Eigen::Index>& targets,
                                           const ForecastConfig& cfg) {
  cfg.validate();
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] < cfg.train_window || targets[i] >= returns.size())
      throw InputError("forecast day " + std::to_string(targets[i]) + " needs " +
                       std::to_string(cfg.train_window) + " days of prior history");
    if (i > 0 && targets[i] <= targets[i - 1]) throw InputError("forecast days must be increasing");
  }

  // Retraining blocks: each starts at a target day and covers the following
  // targets within retrain_every days.
  std::vector<std::pair<std::size_t, std::size_t>> blocks;
  for (std::size_t i = 0; i < targets.size();) {
    std::size_t j = i + 1;
    while (j < targets.size() && targets[j] - targets[i] < cfg.retrain_every) ++j;
    blocks.emplace_back(i, j);
    i = j;
  }
  const unsigned inner_threads = blocks.size() > 1 ? 1 : cfg.threads;

  std::vector<DayForecast> out(targets.size());
  parallel_for(blocks.size(), cfg.threads, [&](std::size_t b) {
    const auto [first, last] = blocks[b];
    const auto t0 = targets[first];
    std::optional<ForecastModel> model;
    std::string failure;
    try {
      model = fit_forecast_model(returns.segment(t0 - cfg.train_window, cfg.train_window), cfg,
                                 make_rng(cfg.seed, {0xf07e, static_cast<std::uint64_t>(t0)})(),
                                 inner_threads);
    } catch (const DivergenceError& e) {
      failure = std::string("training diverged: ") + e.what();
    }
    for (std::size_t i = first; i < last; ++i) {
      const auto t = targets[i];
      auto& day = out[i];
      day.index = t;
      day.truth = returns(t);
      if (!model) {
        day.ok = false;
        day.note = failure;
        day.phi4 = {kNaN, kNaN, kNaN, kNaN, kNaN, kNaN};
        continue;
      }
      day.phi4 = predict_next(*model, returns.head(t), cfg,
                              make_rng(cfg.seed, {0x5a3e, static_cast<std::uint64_t>(t)})());
    }
  });
  return out;
}

double linreg_predict(const Eigen::Ref<const Eigen::VectorXd>& history, Eigen::Index window,
                      Eigen::Index lags) {
  if (lags < 1) throw InputError("regression needs at least one lag");
  if (window < lags + 1) throw InputError("regression window must be >= lags + 1");
  const auto t = history.size();
  if (t - window - lags < 0) throw InputError("history too short for the regression window");
  Eigen::MatrixXd x(window, lags + 1);
  Eigen::VectorXd y(window);
  for (Eigen::Index r = 0; r < window; ++r) {
    const auto s = t - window + r;
    y(r) = history(s);
    x(r, 0) = 1.0;
    for (Eigen::Index l = 1; l <= lags; ++l) x(r, l) = history(s - l);
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < lags + 1) return kNaN;
  const Eigen::VectorXd beta = qr.solve(y);
  double pred = beta(0);
  for (Eigen::Index l = 1; l <= lags; ++l) pred += beta(l) * history(t - l);
  return pred;
}

std::vector<LinregResult> rolling_linreg_baseline(const Eigen::Ref<const Eigen::VectorXd>& returns,
                                                  const std::vector<Eigen::Index>& windows,
                                                  Eigen::Index lags,
                                                  const std::vector<Eigen::Index>& targets) {
  std::vector<LinregResult> out;
  for (auto window : windows) {
    LinregResult res;
    res.window = window;
    res.predictions.resize(static_cast<Eigen::Index>(targets.size()));
    double sum = 0;
    Eigen::Index used = 0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const auto t = targets[i];
      if (t < 0 || t >= returns.size()) throw InputError("target day out of range");
      const double pred = linreg_predict(returns.head(t), window, lags);
      res.predictions(static_cast<Eigen::Index>(i)) = pred;
      if (std::isnan(pred)) {
        ++res.singular_days;
        continue;
      }
      sum += std::abs(pred - returns(t));
      ++used;
    }
    res.mae = used > 0 ? sum / static_cast<double>(used) : kNaN;
    out.push_back(std::move(res));
  }
  return out;
}

}  // namespace phi4
