#include "phi4/validate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "phi4/action.hpp"
#include "phi4/parallel.hpp"
#include "phi4/trainer.hpp"

namespace phi4 {
namespace {

// Apply fn(field_of_estimate) to every family.
template <typename Fn>
MomentEstimate map_families(const std::vector<MomentEstimate>& xs, Fn fn) {
  MomentEstimate out;
  std::vector<Eigen::VectorXd> phi, sq, quart;
  std::vector<Eigen::MatrixXd> pair;
  for (const auto& x : xs) {
    phi.push_back(x.phi);
    sq.push_back(x.sq);
    quart.push_back(x.quart);
    pair.push_back(x.pair);
  }
  out.phi = fn(phi);
  out.sq = fn(sq);
  out.quart = fn(quart);
  out.pair = fn(pair);
  return out;
}

struct Deviation {
  double worst_z = 0;
  std::string where;
};

void track(Deviation& d, const std::string& family, double est, double se, double truth) {
  const double z = std::abs(est - truth) / std::max(se, 1e-300);
  if (z > d.worst_z) {
    d.worst_z = z;
    std::ostringstream os;
    os << family << " est=" << est << " exact=" << truth << " se=" << se;
    d.where = os.str();
  }
}

Deviation compare(const MomentStatistics& mc, const MomentEstimate& exact) {
  Deviation d;
  const auto v = exact.volume();
  for (Eigen::Index i = 0; i < v; ++i) {
    track(d, "phi", mc.mean.phi(i), mc.standard_error.phi(i), exact.phi(i));
    track(d, "phi^2", mc.mean.sq(i), mc.standard_error.sq(i), exact.sq(i));
    track(d, "phi^4", mc.mean.quart(i), mc.standard_error.quart(i), exact.quart(i));
    for (Eigen::Index j = i + 1; j < v; ++j)
      track(d, "phi_i phi_j", mc.mean.pair(i, j), mc.standard_error.pair(i, j), exact.pair(i, j));
  }
  return d;
}

std::string fmt(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

}  // namespace

MomentStatistics batched_moments(const CouplingSetd& theta, const SamplerConfig& cfg, int chains,
                                 int batches_per_chain, std::uint64_t seed, unsigned threads) {
  if (chains < 1 || batches_per_chain < 1) throw InputError("need at least one chain and batch");
  const int per_batch = cfg.n_samples / batches_per_chain;
  if (per_batch < 1) throw InputError("fewer samples than batches");
  std::vector<std::vector<MomentEstimate>> per_chain(static_cast<std::size_t>(chains));
  parallel_for(per_chain.size(), threads, [&](std::size_t c) {
    ChainState state(Eigen::VectorXd::Zero(theta.volume()), make_rng(seed, {0xba7c, c}),
                     cfg.proposal_width);
    const Eigen::MatrixXd samples = sample(theta, cfg, state);
    for (int b = 0; b < batches_per_chain; ++b)
      per_chain[c].push_back(data_moments(samples.middleRows(b * per_batch, per_batch)).means());
  });
  std::vector<MomentEstimate> all;
  for (auto& c : per_chain) all.insert(all.end(), c.begin(), c.end());
  const auto n = static_cast<double>(all.size());

  MomentStatistics out;
  out.batches = static_cast<int>(all.size());
  out.mean = map_families(all, [&](const auto& xs) {
    auto m = xs.front();
    for (std::size_t k = 1; k < xs.size(); ++k) m += xs[k];
    return decltype(m)(m / n);
  });
  out.standard_error = map_families(all, [&](const auto& xs) {
    auto m = xs.front();
    for (std::size_t k = 1; k < xs.size(); ++k) m += xs[k];
    m /= n;
    auto ss = decltype(m)(m * 0.0);
    for (const auto& x : xs) ss += decltype(m)((x - m).array().square().matrix());
    return decltype(m)((ss / (n - 1) / n).array().sqrt().matrix());
  });
  return out;
}

CouplingSetd random_couplings(Eigen::Index volume, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto p = ParameterBundled::zeros(volume);
  for (Eigen::Index i = 0; i < volume; ++i) {
    for (Eigen::Index j = i + 1; j < volume; ++j) p.w(i, j) = -0.6 + 1.2 * u(rng);
    p.mu(i) = -0.3 + 1.3 * u(rng);
    p.lambda(i) = 0.2 + 0.8 * u(rng);
    p.a(i) = -0.5 + 1.0 * u(rng);
  }
  symmetrize_from_upper(p.w);
  return CouplingSetd(std::move(p));
}

ParameterBundled kl_gradient_finite_difference(const CouplingSetd& theta,
                                               const Eigen::Ref<const Eigen::MatrixXd>& data,
                                               double step, const QuadratureSpec& spec) {
  const auto v = theta.volume();
  auto g = ParameterBundled::zeros(v);
  auto central = [&](auto perturb) {
    auto up = theta.params();
    auto down = theta.params();
    perturb(up, step);
    perturb(down, -step);
    return (kl_objective(CouplingSetd(std::move(up)), data, spec) -
            kl_objective(CouplingSetd(std::move(down)), data, spec)) /
           (2 * step);
  };
  for (Eigen::Index i = 0; i < v; ++i) {
    for (Eigen::Index j = i + 1; j < v; ++j) {
      g.w(i, j) = central([&](ParameterBundled& p, double h) {
        p.w(i, j) += h;
        p.w(j, i) += h;
      });
      g.w(j, i) = g.w(i, j);
    }
    g.mu(i) = central([&](ParameterBundled& p, double h) { p.mu(i) += h; });
    g.lambda(i) = central([&](ParameterBundled& p, double h) { p.lambda(i) += h; });
    g.a(i) = central([&](ParameterBundled& p, double h) { p.a(i) += h; });
  }
  return g;
}

std::vector<CheckResult> run_validation(ValidationLevel level, std::uint64_t seed, unsigned threads) {
  std::vector<CheckResult> results;
  auto rng = make_rng(seed, {0x7a11d});
  std::normal_distribution<double> normal(0.0, 1.0);

  {
    double worst = 0;
    for (int trial = 0; trial < 200; ++trial) {
      const auto theta = random_couplings(5, rng);
      Eigen::VectorXd phi(5);
      for (auto& x : phi) x = normal(rng);
      const auto site = static_cast<Eigen::Index>(trial % 5);
      const double nv = normal(rng);
      Eigen::VectorXd moved = phi;
      moved(site) = nv;
      const double s0 = action(theta, phi), s1 = action(theta, moved);
      const double scale = std::max({1.0, std::abs(s0), std::abs(s1)});
      worst = std::max(worst, std::abs(action_delta(theta, phi, site, nv) - (s1 - s0)) / scale);
    }
    results.push_back({"action_delta matches full recomputation", worst <= 1e-12,
                       "max relative error " + fmt(worst)});
  }

  {
    double worst = 0;
    const double h = 1e-5;
    for (int trial = 0; trial < 100; ++trial) {
      const auto theta = random_couplings(3, rng);
      Eigen::VectorXd phi(3);
      for (auto& x : phi) x = normal(rng);
      const auto g = grad_action(theta, phi);
      auto check = [&](double analytic, auto perturb) {
        auto up = theta.params(), down = theta.params();
        perturb(up, h);
        perturb(down, -h);
        const double fd =
            (action(CouplingSetd(std::move(up)), phi) - action(CouplingSetd(std::move(down)), phi)) / (2 * h);
        worst = std::max(worst, std::abs(fd - analytic));
      };
      for (Eigen::Index i = 0; i < 3; ++i) {
        for (Eigen::Index j = i + 1; j < 3; ++j)
          check(g.w(i, j), [&](ParameterBundled& p, double d) { p.w(i, j) += d; p.w(j, i) += d; });
        check(g.mu(i), [&](ParameterBundled& p, double d) { p.mu(i) += d; });
        check(g.lambda(i), [&](ParameterBundled& p, double d) { p.lambda(i) += d; });
        check(g.a(i), [&](ParameterBundled& p, double d) { p.a(i) += d; });
      }
    }
    results.push_back({"grad_action matches finite differences", worst <= 1e-6,
                       "max abs error " + fmt(worst)});
  }

  {
    const auto theta = CouplingSetd::uniform(1, 1.0, 1.0);
    QuadratureSpec coarse, fine;
    fine.points = 2 * coarse.points - 1;
    const double a = quadrature_oracle(theta, coarse).moments.sq(0);
    const double b = quadrature_oracle(theta, fine).moments.sq(0);
    const double rel = std::abs(a - b) / std::abs(b);
    results.push_back({"quadrature grid refinement (V=1)", rel <= 1e-8, "relative change " + fmt(rel)});
  }

  {
    const std::vector<Eigen::Index> volumes =
        level == ValidationLevel::quick ? std::vector<Eigen::Index>{1, 2}
                                        : std::vector<Eigen::Index>{1, 2, 3};
    const int sets = level == ValidationLevel::quick ? 2 : 10;
    SamplerConfig cfg{0.8, 500, 2, level == ValidationLevel::quick ? 8000 : 20000, 0.44};
    for (auto v : volumes) {
      double worst = 0;
      std::string where;
      for (int s = 0; s < sets; ++s) {
        const auto theta = random_couplings(v, rng);
        const auto exact = quadrature_oracle(theta).moments;
        const auto mc = batched_moments(theta, cfg, 16, 10, rng(), threads);
        const auto d = compare(mc, exact);
        if (d.worst_z > worst) {
          worst = d.worst_z;
          where = d.where;
        }
      }
      results.push_back({"sampler moments vs quadrature (V=" + std::to_string(v) + ")", worst <= 4.0,
                         "worst deviation " + fmt(worst) + " SE (" + where + ")"});
    }
  }

  {
    const auto theta = random_couplings(2, rng);
    Eigen::MatrixXd data(50, 2);
    for (auto& x : data.reshaped()) x = 0.8 * normal(rng);
    const auto exact = quadrature_oracle(theta).moments;
    const auto analytic = kl_gradient(theta, data_moments(data).means(), exact);
    const auto fd = kl_gradient_finite_difference(theta, data, 1e-4);
    double worst = std::max({(analytic.w - fd.w).cwiseAbs().maxCoeff(),
                             (analytic.mu - fd.mu).cwiseAbs().maxCoeff(),
                             (analytic.lambda - fd.lambda).cwiseAbs().maxCoeff(),
                             (analytic.a - fd.a).cwiseAbs().maxCoeff()});
    results.push_back({"kl_gradient vs quadrature finite differences (V=2)", worst <= 1e-5,
                       "max abs error " + fmt(worst)});
  }
  return results;
}

}  // namespace phi4
