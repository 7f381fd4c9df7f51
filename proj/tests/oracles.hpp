#pragma once

// Independent reference implementations used only by the tests. They share
// no code with the library beyond the CouplingSet accessors.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

#include "phi4/coupling_set.hpp"

namespace oracle {

inline double scalar_action(const phi4::CouplingSetd& t, const Eigen::VectorXd& phi) {
  const auto v = t.volume();
  double s = 0;
  for (Eigen::Index i = 0; i < v; ++i)
    for (Eigen::Index j = i + 1; j < v; ++j) s -= t.weight(i, j) * phi(i) * phi(j);
  for (Eigen::Index i = 0; i < v; ++i) {
    const double x = phi(i);
    s += t.mass_sq()(i) * x * x + t.quartic()(i) * x * x * x * x - t.bias()(i) * x;
  }
  return s;
}

struct Naive {
  std::vector<double> phi, sq, quart;
  std::vector<std::vector<double>> pair;
};

// Two passes over the rows, plain loops.
inline Naive naive_moments(const Eigen::MatrixXd& rows) {
  const auto n = rows.rows();
  const auto v = rows.cols();
  Naive m;
  m.phi.assign(v, 0.0);
  m.sq.assign(v, 0.0);
  m.quart.assign(v, 0.0);
  m.pair.assign(v, std::vector<double>(v, 0.0));
  for (Eigen::Index j = 0; j < v; ++j) {
    for (Eigen::Index r = 0; r < n; ++r) m.phi[j] += rows(r, j);
    m.phi[j] /= n;
  }
  for (Eigen::Index j = 0; j < v; ++j) {
    for (Eigen::Index r = 0; r < n; ++r) {
      const double x = rows(r, j);
      m.sq[j] += x * x / n;
      m.quart[j] += x * x * x * x / n;
      for (Eigen::Index k = 0; k < v; ++k) m.pair[j][k] += x * rows(r, k) / n;
    }
  }
  return m;
}

// Composite Simpson on [lo, hi] with n (even) intervals.
inline double simpson(const std::function<double(double)>& f, double lo, double hi, int n = 20000) {
  const double h = (hi - lo) / n;
  double s = f(lo) + f(hi);
  for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f(lo + k * h);
  return s * h / 3.0;
}

// Moments of one free site given all others fixed at `phi`.
struct Conditional {
  double mean, sq, quart;
};

inline Conditional conditional_1d(const phi4::CouplingSetd& t, const Eigen::VectorXd& phi, Eigen::Index site) {
  double field = t.bias()(site);
  for (Eigen::Index j = 0; j < t.volume(); ++j)
    if (j != site) field += t.weight(site, j) * phi(j);
  const double mu = t.mass_sq()(site), lam = t.quartic()(site);
  auto energy = [&](double x) { return mu * x * x + lam * x * x * x * x - field * x; };
  // Shift by the minimum on a coarse grid to keep exp() in range.
  double emin = 1e300;
  for (double x = -30; x <= 30; x += 0.01) emin = std::min(emin, energy(x));
  auto w = [&](double x) { return std::exp(-(energy(x) - emin)); };
  const double lo = -30, hi = 30;
  const double z = simpson(w, lo, hi);
  return {simpson([&](double x) { return x * w(x); }, lo, hi) / z,
          simpson([&](double x) { return x * x * w(x); }, lo, hi) / z,
          simpson([&](double x) { return x * x * x * x * w(x); }, lo, hi) / z};
}

// Pearson kurtosis of a +-1 series with a fraction p of +1 entries.
inline double two_point_kurtosis(double p) {
  const double q = 1.0 - p;
  return (1.0 - 3.0 * p * q) / (p * q);
}

}  // namespace oracle
