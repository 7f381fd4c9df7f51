#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>

#include "phi4/clamp.hpp"
#include "phi4/coupling_set.hpp"
#include "phi4/moments.hpp"

namespace phi4 {

/// Tensor-product Simpson quadrature over [-L, L]^d for the free sites.
///
/// L starts at 6 * max(1, scale) (or `half_width` if given) and doubles until
/// exp(-S) on the grid boundary is below `boundary_tolerance` times its peak.
struct QuadratureSpec {
  int points = 401;  // per axis, odd
  double scale = 1.0;
  double boundary_tolerance = 1e-16;
  int max_doublings = 16;
  std::optional<double> half_width;
};

struct QuadratureResult {
  double log_z = 0;       // log of the integral over the free sites
  double half_width = 0;  // L actually used
  MomentEstimate moments;  // clamped sites enter as constants
};

/// Exact (to quadrature accuracy) partition function and moments. At most
/// three free sites.
QuadratureResult quadrature_oracle(const CouplingSetd& theta, const QuadratureSpec& spec = {});
QuadratureResult quadrature_oracle(const CouplingSetd& theta, const Clamp& clamp,
                                   const QuadratureSpec& spec = {});

/// Expectation of an arbitrary function of the full configuration under the
/// (optionally clamped) Boltzmann distribution.
double quadrature_expectation(const CouplingSetd& theta, const Clamp& clamp,
                              const std::function<double(const Eigen::VectorXd&)>& f,
                              const QuadratureSpec& spec = {});

/// Data-dependent part of KL(q || p): <S>_q + ln Z. Differs from the
/// divergence by the theta-independent entropy of q.
double kl_objective(const CouplingSetd& theta, const Eigen::Ref<const Eigen::MatrixXd>& data,
                    const QuadratureSpec& spec = {});

}  // namespace phi4
