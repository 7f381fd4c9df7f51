#pragma once

#include <Eigen/Dense>

#include "phi4/coupling_set.hpp"
#include "phi4/errors.hpp"

namespace phi4 {

namespace detail {

template <typename Scalar, typename Derived>
void check_field(const CouplingSet<Scalar>& theta, const Eigen::MatrixBase<Derived>& phi) {
  if (phi.size() != theta.volume())
    throw InputError("field has " + std::to_string(phi.size()) + " sites, couplings have " +
                     std::to_string(theta.volume()));
  if (!phi.allFinite()) throw InputError("field has non-finite entries");
}

// Local energy change of moving one site; no argument checks.
template <typename Scalar, typename Derived>
Scalar action_delta_unchecked(const CouplingSet<Scalar>& theta,
                              const Eigen::MatrixBase<Derived>& phi, Eigen::Index site,
                              Scalar new_value) {
  const Scalar old_value = phi(site);
  const Scalar d = new_value - old_value;
  const Scalar local_field = theta.weights().col(site).dot(phi) + theta.bias()(site);
  const Scalar old_sq = old_value * old_value;
  const Scalar new_sq = new_value * new_value;
  return -local_field * d + theta.mass_sq()(site) * (new_sq - old_sq) +
         theta.quartic()(site) * (new_sq * new_sq - old_sq * old_sq);
}

}  // namespace detail

/// S = -sum_{i<j} w_ij phi_i phi_j + sum_i mu_i phi_i^2 + sum_i lambda_i phi_i^4 - sum_i a_i phi_i.
/// Each unordered pair contributes once.
template <typename Scalar, typename Derived>
Scalar action(const CouplingSet<Scalar>& theta, const Eigen::MatrixBase<Derived>& phi) {
  detail::check_field(theta, phi);
  const auto sq = phi.array().square();
  const Scalar pair = Scalar(0.5) * phi.dot(theta.weights() * phi);
  return -pair + (theta.mass_sq().array() * sq).sum() +
         (theta.quartic().array() * sq.square()).sum() - theta.bias().dot(phi);
}

/// S(phi with phi_site -> new_value) - S(phi), in O(V).
template <typename Scalar, typename Derived>
Scalar action_delta(const CouplingSet<Scalar>& theta, const Eigen::MatrixBase<Derived>& phi,
                    Eigen::Index site, Scalar new_value) {
  detail::check_field(theta, phi);
  if (site < 0 || site >= theta.volume())
    throw InputError("site index " + std::to_string(site) + " out of range");
  if (!std::isfinite(new_value)) throw InputError("proposed value is not finite");
  return detail::action_delta_unchecked(theta, phi, site, new_value);
}

/// Derivatives of the action with respect to every coupling:
/// dS/dw_ij = -phi_i phi_j, dS/dmu_i = phi_i^2, dS/dlambda_i = phi_i^4, dS/da_i = -phi_i.
template <typename Scalar, typename Derived>
ParameterBundle<Scalar> grad_action(const CouplingSet<Scalar>& theta,
                                    const Eigen::MatrixBase<Derived>& phi) {
  detail::check_field(theta, phi);
  ParameterBundle<Scalar> g;
  g.w = -(phi * phi.transpose());
  g.w.diagonal().setZero();
  g.mu = phi.array().square().matrix();
  g.lambda = phi.array().square().square().matrix();
  g.a = -phi;
  return g;
}

}  // namespace phi4
