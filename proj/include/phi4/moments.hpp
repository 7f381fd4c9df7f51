#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>

#include "phi4/coupling_set.hpp"
#include "phi4/errors.hpp"

namespace phi4 {

/// Expectations of the action's sufficient statistics.
/// `pair(i, j)` = <phi_i phi_j>; its diagonal equals `sq`.
struct MomentEstimate {
  Eigen::VectorXd phi;
  Eigen::MatrixXd pair;
  Eigen::VectorXd sq;
  Eigen::VectorXd quart;

  Eigen::Index volume() const { return phi.size(); }
};

/// Running sums of phi_i, phi_i phi_j, phi_i^2 and phi_i^4.
class MomentAccumulator {
 public:
  MomentAccumulator() = default;
  explicit MomentAccumulator(Eigen::Index volume)
      : sum_phi_(Eigen::VectorXd::Zero(volume)),
        sum_pair_(Eigen::MatrixXd::Zero(volume, volume)),
        sum_sq_(Eigen::VectorXd::Zero(volume)),
        sum_quart_(Eigen::VectorXd::Zero(volume)) {}

  template <typename Derived>
  void add(const Eigen::MatrixBase<Derived>& phi) {
    if (phi.size() != volume()) throw InputError("configuration length does not match accumulator");
    const Eigen::ArrayXd sq = phi.array().square();
    sum_phi_ += phi;
    sum_pair_.noalias() += phi * phi.transpose();
    sum_sq_ += sq.matrix();
    sum_quart_ += sq.square().matrix();
    ++n_;
  }

  void merge(const MomentAccumulator& other) {
    if (other.volume() != volume()) throw InputError("cannot merge accumulators of different volume");
    sum_phi_ += other.sum_phi_;
    sum_pair_ += other.sum_pair_;
    sum_sq_ += other.sum_sq_;
    sum_quart_ += other.sum_quart_;
    n_ += other.n_;
  }

  std::int64_t count() const { return n_; }
  Eigen::Index volume() const { return sum_phi_.size(); }

  MomentEstimate means() const {
    if (n_ < 1) throw InputError("moments are undefined for an empty accumulator");
    const double inv = 1.0 / static_cast<double>(n_);
    return {sum_phi_ * inv, sum_pair_ * inv, sum_sq_ * inv, sum_quart_ * inv};
  }

 private:
  std::int64_t n_ = 0;
  Eigen::VectorXd sum_phi_;
  Eigen::MatrixXd sum_pair_;
  Eigen::VectorXd sum_sq_;
  Eigen::VectorXd sum_quart_;
};

/// Empirical moments of a data set; rows of `configs` are field configurations.
MomentAccumulator data_moments(const Eigen::Ref<const Eigen::MatrixXd>& configs);

/// Gradient of KL(q || p) with respect to the couplings, given data (q) and
/// model (p) expectations. Descending it reduces the divergence.
ParameterBundled kl_gradient(const CouplingSetd& theta, const MomentEstimate& data,
                             const MomentEstimate& model);

inline ParameterBundled kl_gradient(const CouplingSetd& theta, const MomentAccumulator& data,
                                    const MomentAccumulator& model) {
  return kl_gradient(theta, data.means(), model.means());
}

/// Largest absolute data-vs-model gap per moment family.
struct MomentResiduals {
  double phi = 0;
  double pair = 0;
  double sq = 0;
  double quart = 0;
};

MomentResiduals moment_residuals(const MomentEstimate& data, const MomentEstimate& model);

}  // namespace phi4
