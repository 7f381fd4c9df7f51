#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "phi4/coupling_set.hpp"
#include "phi4/moments.hpp"
#include "phi4/quadrature.hpp"
#include "phi4/rng.hpp"
#include "phi4/sampler.hpp"

namespace phi4 {

/// MCMC moment estimates with standard errors from batch means. Each chain
/// runs cfg.sweeps_burn_in, then cfg.n_samples recorded states split into
/// `batches_per_chain` contiguous batches.
struct MomentStatistics {
  MomentEstimate mean;
  MomentEstimate standard_error;
  int batches = 0;
};

MomentStatistics batched_moments(const CouplingSetd& theta, const SamplerConfig& cfg, int chains,
                                 int batches_per_chain, std::uint64_t seed, unsigned threads = 1);

/// Random couplings in a moderate, well-mixed regime; used by self-checks.
CouplingSetd random_couplings(Eigen::Index volume, Rng& rng);

/// Central finite differences of the quadrature KL objective with respect to
/// every coupling (pair weights perturbed as one unordered-pair value).
ParameterBundled kl_gradient_finite_difference(const CouplingSetd& theta,
                                               const Eigen::Ref<const Eigen::MatrixXd>& data,
                                               double step, const QuadratureSpec& spec = {});

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

enum class ValidationLevel { quick, full };

/// Oracle self-checks: action locality, action gradient, quadrature
/// convergence, sampler moments vs quadrature, KL gradient vs quadrature.
std::vector<CheckResult> run_validation(ValidationLevel level, std::uint64_t seed, unsigned threads);

}  // namespace phi4
