#include "phi4/quadrature.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "phi4/action.hpp"

namespace phi4 {
namespace {

constexpr int kMaxFree = 3;

// The action restricted to the free sites, with clamped sites folded into
// effective biases and a constant.
struct Reduced {
  int dims = 0;
  std::vector<Eigen::Index> free;
  std::array<std::vector<double>, kMaxFree> x;  // grid coordinates per axis
  std::array<std::vector<double>, kMaxFree> g;  // single-site potential on the grid
  std::vector<double> weights;                 // Simpson weights
  double w01 = 0, w02 = 0, w12 = 0;
  double constant = 0;
  int n = 0;
};

std::vector<double> simpson_weights(int n, double h) {
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) w[k] = (k == 0 || k == n - 1) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
  for (auto& v : w) v *= h / 3.0;
  return w;
}

Reduced reduce(const CouplingSetd& theta, const Clamp& clamp, int points, double half_width) {
  Reduced r;
  r.free = clamp.free_sites();
  r.dims = static_cast<int>(r.free.size());
  r.n = points;
  const auto& w = theta.weights();
  const auto v = theta.volume();

  for (Eigen::Index i = 0; i < v; ++i) {
    if (!clamp.clamped(i)) continue;
    const double vi = clamp.values(i);
    r.constant += theta.mass_sq()(i) * vi * vi + theta.quartic()(i) * vi * vi * vi * vi -
                  theta.bias()(i) * vi;
    for (Eigen::Index j = i + 1; j < v; ++j)
      if (clamp.clamped(j)) r.constant -= w(i, j) * vi * clamp.values(j);
  }

  const double h = 2.0 * half_width / (points - 1);
  r.weights = simpson_weights(points, h);
  for (int m = 0; m < r.dims; ++m) {
    const auto site = r.free[m];
    double field = theta.bias()(site);
    for (Eigen::Index j = 0; j < v; ++j)
      if (clamp.clamped(j)) field += w(site, j) * clamp.values(j);
    r.x[m].resize(points);
    r.g[m].resize(points);
    for (int k = 0; k < points; ++k) {
      const double xk = -half_width + k * h;
      const double sq = xk * xk;
      r.x[m][k] = xk;
      r.g[m][k] = theta.mass_sq()(site) * sq + theta.quartic()(site) * sq * sq - field * xk;
    }
  }
  if (r.dims >= 2) r.w01 = w(r.free[0], r.free[1]);
  if (r.dims >= 3) {
    r.w02 = w(r.free[0], r.free[2]);
    r.w12 = w(r.free[1], r.free[2]);
  }
  return r;
}

// Calls visit(k0, k1, k2, x0, x1, x2, s_free) over the whole grid. Missing
// axes have a single point at x = 0.
template <typename Visit>
void sweep(const Reduced& r, Visit&& visit) {
  const int n0 = r.dims >= 1 ? r.n : 1;
  const int n1 = r.dims >= 2 ? r.n : 1;
  const int n2 = r.dims >= 3 ? r.n : 1;
  for (int k0 = 0; k0 < n0; ++k0) {
    const double x0 = r.dims >= 1 ? r.x[0][k0] : 0.0;
    const double g0 = r.dims >= 1 ? r.g[0][k0] : 0.0;
    for (int k1 = 0; k1 < n1; ++k1) {
      const double x1 = r.dims >= 2 ? r.x[1][k1] : 0.0;
      const double s01 = g0 + (r.dims >= 2 ? r.g[1][k1] : 0.0) - r.w01 * x0 * x1;
      for (int k2 = 0; k2 < n2; ++k2) {
        const double x2 = r.dims >= 3 ? r.x[2][k2] : 0.0;
        const double s =
            s01 + (r.dims >= 3 ? r.g[2][k2] - r.w02 * x0 * x2 - r.w12 * x1 * x2 : 0.0);
        visit(k0, k1, k2, x0, x1, x2, s);
      }
    }
  }
}

double axis_weight(const Reduced& r, int axis, int k) {
  return r.dims > axis ? r.weights[k] : 1.0;
}

struct Prepared {
  Reduced reduced;
  double s_min = 0;
};

// Picks L and returns the reduced problem on the final grid.
Prepared prepare(const CouplingSetd& theta, const Clamp& clamp, const QuadratureSpec& spec) {
  clamp.validate(theta.volume());
  const int dims = static_cast<int>(clamp.free_count());
  if (dims == 0) throw InputError("quadrature needs at least one free site");
  if (dims > kMaxFree) throw InputError("quadrature supports at most three free sites");
  if (spec.points < 3 || spec.points % 2 == 0)
    throw InputError("quadrature needs an odd number of points >= 3");

  double half_width = spec.half_width.value_or(6.0 * std::max(1.0, spec.scale));
  const double log_tol = -std::log(spec.boundary_tolerance);
  for (int attempt = 0; attempt <= spec.max_doublings; ++attempt, half_width *= 2.0) {
    Prepared p{reduce(theta, clamp, spec.points, half_width), 0.0};
    const int last = spec.points - 1;
    double s_min = std::numeric_limits<double>::infinity();
    double s_edge = std::numeric_limits<double>::infinity();
    sweep(p.reduced, [&](int k0, int k1, int k2, double, double, double, double s) {
      s_min = std::min(s_min, s);
      const bool edge = k0 == 0 || k0 == last || (dims >= 2 && (k1 == 0 || k1 == last)) ||
                        (dims >= 3 && (k2 == 0 || k2 == last));
      if (edge) s_edge = std::min(s_edge, s);
    });
    if (!std::isfinite(s_min)) throw InputError("action is not finite on the quadrature grid");
    if (s_edge - s_min > log_tol) {
      p.s_min = s_min;
      return p;
    }
  }
  throw InputError("quadrature boundary mass check failed; increase the grid half-width");
}

}  // namespace

QuadratureResult quadrature_oracle(const CouplingSetd& theta, const QuadratureSpec& spec) {
  return quadrature_oracle(theta, Clamp::none(theta.volume()), spec);
}

QuadratureResult quadrature_oracle(const CouplingSetd& theta, const Clamp& clamp,
                                   const QuadratureSpec& spec) {
  const auto prepared = prepare(theta, clamp, spec);
  const auto& r = prepared.reduced;
  const int d = r.dims;

  double z = 0;
  std::array<double, kMaxFree> m1{};
  std::array<std::array<double, kMaxFree>, kMaxFree> m2{};
  std::array<double, kMaxFree> m4{};
  sweep(r, [&](int k0, int k1, int k2, double x0, double x1, double x2, double s) {
    const double e = std::exp(prepared.s_min - s) * axis_weight(r, 0, k0) *
                     axis_weight(r, 1, k1) * axis_weight(r, 2, k2);
    const std::array<double, kMaxFree> x{x0, x1, x2};
    z += e;
    for (int m = 0; m < d; ++m) {
      const double ex = e * x[m];
      m1[m] += ex;
      for (int n = m; n < d; ++n) m2[m][n] += ex * x[n];
      const double sq = x[m] * x[m];
      m4[m] += e * sq * sq;
    }
  });

  const auto v = theta.volume();
  Eigen::VectorXd mean = clamp.values;
  Eigen::VectorXd quart(v);
  for (Eigen::Index i = 0; i < v; ++i) quart(i) = std::pow(clamp.values(i), 4);
  for (int m = 0; m < d; ++m) {
    mean(r.free[m]) = m1[m] / z;
    quart(r.free[m]) = m4[m] / z;
  }
  Eigen::MatrixXd pair = mean * mean.transpose();  // exact for any pair with a clamped site
  for (int m = 0; m < d; ++m)
    for (int n = m; n < d; ++n) {
      pair(r.free[m], r.free[n]) = m2[m][n] / z;
      pair(r.free[n], r.free[m]) = m2[m][n] / z;
    }

  QuadratureResult out;
  out.log_z = -(r.constant + prepared.s_min) + std::log(z);
  out.half_width = -r.x[0].front();
  out.moments = {mean, pair, pair.diagonal(), quart};
  return out;
}

double quadrature_expectation(const CouplingSetd& theta, const Clamp& clamp,
                              const std::function<double(const Eigen::VectorXd&)>& f,
                              const QuadratureSpec& spec) {
  const auto prepared = prepare(theta, clamp, spec);
  const auto& r = prepared.reduced;
  Eigen::VectorXd phi = clamp.values;
  double z = 0, acc = 0;
  sweep(r, [&](int k0, int k1, int k2, double x0, double x1, double x2, double s) {
    const double e = std::exp(prepared.s_min - s) * axis_weight(r, 0, k0) *
                     axis_weight(r, 1, k1) * axis_weight(r, 2, k2);
    const std::array<double, kMaxFree> x{x0, x1, x2};
    for (int m = 0; m < r.dims; ++m) phi(r.free[m]) = x[m];
    z += e;
    acc += e * f(phi);
  });
  return acc / z;
}

double kl_objective(const CouplingSetd& theta, const Eigen::Ref<const Eigen::MatrixXd>& data,
                    const QuadratureSpec& spec) {
  if (data.rows() < 1) throw InputError("empty data set");
  double mean_action = 0;
  for (Eigen::Index n = 0; n < data.rows(); ++n)
    mean_action += action(theta, data.row(n).transpose());
  mean_action /= static_cast<double>(data.rows());
  return mean_action + quadrature_oracle(theta, spec).log_z;
}

}  // namespace phi4
