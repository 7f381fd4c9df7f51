#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "phi4/errors.hpp"

namespace phi4 {

/// Fields held fixed at observed values. `values` has one entry per site;
/// entries at unclamped sites are ignored.
struct Clamp {
  std::vector<bool> mask;
  Eigen::VectorXd values;

  static Clamp none(Eigen::Index volume) {
    return {std::vector<bool>(static_cast<std::size_t>(volume), false),
            Eigen::VectorXd::Zero(volume)};
  }

  Eigen::Index volume() const { return static_cast<Eigen::Index>(mask.size()); }
  bool clamped(Eigen::Index i) const { return mask[static_cast<std::size_t>(i)]; }

  Eigen::Index free_count() const {
    Eigen::Index n = 0;
    for (bool m : mask) n += m ? 0 : 1;
    return n;
  }

  std::vector<Eigen::Index> free_sites() const {
    std::vector<Eigen::Index> out;
    for (Eigen::Index i = 0; i < volume(); ++i)
      if (!clamped(i)) out.push_back(i);
    return out;
  }

  void validate(Eigen::Index volume) const {
    if (this->volume() != volume || values.size() != volume)
      throw InputError("clamp does not match the model volume");
    for (Eigen::Index i = 0; i < volume; ++i)
      if (clamped(i) && !std::isfinite(values(i))) throw InputError("clamped value is not finite");
  }

  /// Overwrite clamped coordinates of `phi` with their observed values.
  void apply(Eigen::VectorXd& phi) const {
    for (Eigen::Index i = 0; i < volume(); ++i)
      if (clamped(i)) phi(i) = values(i);
  }
};

}  // namespace phi4
