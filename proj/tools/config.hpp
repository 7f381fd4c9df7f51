#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "phi4/forecast.hpp"
#include "phi4/sampler.hpp"
#include "phi4/trainer.hpp"

namespace phi4::cli {

/// Everything a config file can set. Keys mirror the struct field names:
///   learning_rate = 0.01
///   [sampler]
///   n_samples = 8
/// Section headers prefix the keys that follow ("sampler.n_samples").
struct RunConfig {
  TrainConfig train;
  bool standardize = true;  // z-score each ticker before training
  SamplerConfig sampling;    // unconditional / conditional sampling commands
  ForecastConfig forecast;
  Eigen::Index lags = 1;     // baseline regression
};

RunConfig default_run_config();

/// Flat key -> value map; '#' starts a comment.
std::map<std::string, std::string> parse_key_values(const std::string& text,
                                                    const std::string& source);

/// Applies every key to `cfg`; unknown keys and bad values are InputErrors.
void apply_config(RunConfig& cfg, const std::map<std::string, std::string>& values);

RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace phi4::cli
