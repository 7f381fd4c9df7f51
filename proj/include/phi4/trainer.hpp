#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

#include "phi4/coupling_set.hpp"
#include "phi4/moments.hpp"
#include "phi4/quadrature.hpp"
#include "phi4/sampler.hpp"

namespace phi4 {

struct InitSpec {
  double w_init_std = 0.01;
  double a_init = 0.0;
  double mu_init = 0.5;
  double lambda_init = 0.5;
};

/// Where model expectations come from each epoch. Quadrature is exact and
/// deterministic but limited to V <= 3.
enum class MomentSource { mcmc, quadrature };

struct TrainConfig {
  double learning_rate = 1e-2;
  double lambda_rate_scale = 0.1;  // lambda step = learning_rate * lambda_rate_scale
  int epochs = 1000;
  int chains = 8;
  bool persistent = true;
  // Per-epoch sampling of each chain. Burn-in runs on the first epoch for
  // persistent chains and on every epoch for fresh ones.
  SamplerConfig sampler{0.5, 200, 2, 8, 0.44};
  InitSpec init;
  std::uint64_t seed = 1;
  double l2_weight_decay = 0.0;
  // Return the mean of the iterates over the final fraction of epochs
  // instead of the last iterate. 0 disables averaging.
  double averaging_fraction = 0.0;
  MomentSource moment_source = MomentSource::mcmc;
  QuadratureSpec quadrature;
  unsigned threads = 0;

  void validate() const;
};

struct EpochDiagnostics {
  int epoch = 0;
  MomentResiduals residuals;
  double acceptance_rate = 0;
};

struct TrainResult {
  CouplingSetd theta;
  std::vector<EpochDiagnostics> history;
};

/// Random initial couplings per InitSpec; weights ~ N(0, w_init_std^2).
CouplingSetd initial_couplings(Eigen::Index volume, const InitSpec& init, std::uint64_t seed);

/// Minimizes KL(q || p) by gradient descent with MCMC (or quadrature) model
/// moments. Rows of `data` are training configurations.
TrainResult train(const Eigen::Ref<const Eigen::MatrixXd>& data, const TrainConfig& cfg,
                  const std::optional<CouplingSetd>& start = std::nullopt);

/// Model moments from `chains` independent long chains, reduced in chain order.
/// `per_chain`, if given, receives each chain's accumulator.
MomentAccumulator estimate_model_moments(const CouplingSetd& theta, const SamplerConfig& cfg,
                                         int chains, std::uint64_t seed, unsigned threads,
                                         std::vector<MomentAccumulator>* per_chain = nullptr);

}  // namespace phi4
