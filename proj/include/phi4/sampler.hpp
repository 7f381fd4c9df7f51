#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "phi4/clamp.hpp"
#include "phi4/coupling_set.hpp"
#include "phi4/rng.hpp"

namespace phi4 {

struct SamplerConfig {
  double proposal_width = 0.5;
  int sweeps_burn_in = 2000;
  int sweeps_between_samples = 10;
  int n_samples = 5000;
  // Target acceptance rate for per-site width adaptation during burn-in.
  std::optional<double> adapt_acceptance = 0.44;

  void validate() const;
};

/// One Markov chain. Clamped entries of `phi` never change.
struct ChainState {
  Eigen::VectorXd phi;
  Rng rng;
  std::int64_t step_count = 0;
  std::vector<bool> clamp_mask;
  Eigen::VectorXd proposal_widths;  // per site
  Eigen::VectorXd accepted;         // per site, since last reset
  Eigen::VectorXd proposed;
  std::normal_distribution<double> normal{0.0, 1.0};

  ChainState() = default;
  ChainState(Eigen::VectorXd initial, Rng generator, double width, const Clamp* clamp = nullptr);

  void reset_counters();
  double acceptance_rate() const;
};

/// One sequential-scan sweep of single-site random-walk Metropolis over the
/// unclamped sites.
void metropolis_sweep(const CouplingSetd& theta, ChainState& state);

/// Nudges each site's proposal width toward the target acceptance rate using
/// the counters since the last reset, then resets them.
void adapt_proposal_widths(ChainState& state, double target);

/// Burn-in (with adaptation if configured), then n_samples recorded states.
/// Rows of the result are samples.
Eigen::MatrixXd sample(const CouplingSetd& theta, const SamplerConfig& cfg, ChainState& state);

/// Runs `chains` independent chains from `initial` and stacks their samples in
/// chain order.
Eigen::MatrixXd sample(const CouplingSetd& theta, const SamplerConfig& cfg,
                       const Eigen::VectorXd& initial, const std::optional<Clamp>& clamp,
                       std::uint64_t seed, int chains = 1, unsigned threads = 1);

/// Posterior summary of the free sites.
struct Posterior {
  std::vector<Eigen::Index> sites;
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;
  Eigen::VectorXd standard_error;  // of the mean, from batch means
  Eigen::VectorXd q05;
  Eigen::VectorXd q50;
  Eigen::VectorXd q95;
};

Posterior summarize(const Eigen::MatrixXd& samples, const std::vector<Eigen::Index>& sites,
                    int batches = 20);

Posterior conditional_mean(const CouplingSetd& theta, const SamplerConfig& cfg, const Clamp& clamp,
                           std::uint64_t seed, int chains = 1, unsigned threads = 1);

/// Linear-interpolated sample quantile (type 7).
double quantile(std::vector<double> values, double q);

/// Standard error of the mean of `values` from `batches` contiguous batch means.
double batch_mean_stderr(const Eigen::Ref<const Eigen::VectorXd>& values, int batches = 20);

}  // namespace phi4
