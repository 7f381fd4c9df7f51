#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>

#include "phi4/errors.hpp"

namespace phi4 {

/// Lower bound on every quartic coupling. Keeps the partition function finite.
inline constexpr double kLambdaMin = 1e-4;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Parameter-shaped bundle {w, mu, lambda, a}. Used both for raw parameter
/// values and for gradients with respect to them.
///
/// `w` is a dense symmetric V x V matrix with zero diagonal; entry (i, j) and
/// (j, i) hold the same single value of the unordered pair {i, j}.
template <typename Scalar>
struct ParameterBundle {
  Matrix<Scalar> w;
  Vector<Scalar> mu;
  Vector<Scalar> lambda;
  Vector<Scalar> a;

  static ParameterBundle zeros(Eigen::Index volume) {
    return {Matrix<Scalar>::Zero(volume, volume), Vector<Scalar>::Zero(volume),
            Vector<Scalar>::Zero(volume), Vector<Scalar>::Zero(volume)};
  }

  Eigen::Index volume() const { return mu.size(); }

  bool all_finite() const {
    return w.allFinite() && mu.allFinite() && lambda.allFinite() && a.allFinite();
  }

  ParameterBundle& operator+=(const ParameterBundle& o) {
    w += o.w;
    mu += o.mu;
    lambda += o.lambda;
    a += o.a;
    return *this;
  }

  ParameterBundle& operator*=(Scalar s) {
    w *= s;
    mu *= s;
    lambda *= s;
    a *= s;
    return *this;
  }
};

/// Mirror the strict upper triangle of `w` into the lower one and zero the diagonal.
template <typename Scalar>
void symmetrize_from_upper(Matrix<Scalar>& w) {
  w.diagonal().setZero();
  w.template triangularView<Eigen::StrictlyLower>() = w.transpose();
}

/// Couplings of the disordered phi^4 action on the complete graph of V sites.
///
/// Invariants (checked on construction):
///   - all four members have consistent size V >= 1,
///   - w is exactly symmetric with zero diagonal,
///   - lambda_i >= kLambdaMin,
///   - every entry is finite.
template <typename Scalar>
class CouplingSet {
 public:
  CouplingSet() = default;

  explicit CouplingSet(ParameterBundle<Scalar> params) : p_(std::move(params)) { validate(); }

  /// Uniform couplings: no weights, no bias, given mass and quartic terms.
  static CouplingSet uniform(Eigen::Index volume, Scalar mass_sq, Scalar quartic) {
    auto p = ParameterBundle<Scalar>::zeros(volume);
    p.mu.setConstant(mass_sq);
    p.lambda.setConstant(quartic);
    return CouplingSet(std::move(p));
  }

  Eigen::Index volume() const { return p_.mu.size(); }
  const ParameterBundle<Scalar>& params() const { return p_; }
  const Matrix<Scalar>& weights() const { return p_.w; }
  const Vector<Scalar>& mass_sq() const { return p_.mu; }
  const Vector<Scalar>& quartic() const { return p_.lambda; }
  const Vector<Scalar>& bias() const { return p_.a; }

  Scalar weight(Eigen::Index i, Eigen::Index j) const { return p_.w(i, j); }

  /// Number of stored pair weights, V(V-1)/2.
  Eigen::Index pair_count() const { return volume() * (volume() - 1) / 2; }

  /// Copy with the pair {i, j} set to `value`.
  CouplingSet with_weight(Eigen::Index i, Eigen::Index j, Scalar value) const {
    if (i == j) throw InputError("self-coupling w_ii is not a parameter");
    auto p = p_;
    p.w(i, j) = value;
    p.w(j, i) = value;
    return CouplingSet(std::move(p));
  }

  /// Copy with the bias vector negated (the Z2 partner of this coupling set).
  CouplingSet flipped_bias() const {
    auto p = p_;
    p.a = -p.a;
    return CouplingSet(std::move(p));
  }

 private:
  void validate() const {
    const auto v = p_.mu.size();
    if (v < 1) throw InputError("coupling set needs at least one site");
    if (p_.w.rows() != v || p_.w.cols() != v || p_.lambda.size() != v || p_.a.size() != v)
      throw InputError("coupling set members disagree on the volume");
    if (!p_.all_finite()) throw InputError("coupling set has non-finite entries");
    for (Eigen::Index i = 0; i < v; ++i) {
      if (p_.w(i, i) != Scalar(0)) throw InputError("weight matrix has a nonzero diagonal");
      for (Eigen::Index j = i + 1; j < v; ++j)
        if (p_.w(i, j) != p_.w(j, i)) throw InputError("weight matrix is not symmetric");
      if (p_.lambda(i) < Scalar(kLambdaMin))
        throw InputError("quartic coupling below lambda_min at site " + std::to_string(i));
    }
  }

  ParameterBundle<Scalar> p_;
};

using CouplingSetd = CouplingSet<double>;
using ParameterBundled = ParameterBundle<double>;

}  // namespace phi4
