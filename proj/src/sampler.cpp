#include "phi4/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "phi4/action.hpp"
#include "phi4/parallel.hpp"

namespace phi4 {
namespace {

constexpr int kAdaptInterval = 50;

}  // namespace

void SamplerConfig::validate() const {
  if (!(proposal_width > 0) || !std::isfinite(proposal_width))
    throw InputError("proposal_width must be positive");
  if (sweeps_burn_in < 0 || sweeps_between_samples < 0 || n_samples < 0)
    throw InputError("sampler counts must be non-negative");
  if (adapt_acceptance && !(*adapt_acceptance > 0 && *adapt_acceptance < 1))
    throw InputError("adapt_acceptance must lie in (0, 1)");
}

ChainState::ChainState(Eigen::VectorXd initial, Rng generator, double width, const Clamp* clamp)
    : phi(std::move(initial)),
      rng(std::move(generator)),
      clamp_mask(static_cast<std::size_t>(phi.size()), false),
      proposal_widths(Eigen::VectorXd::Constant(phi.size(), width)),
      accepted(Eigen::VectorXd::Zero(phi.size())),
      proposed(Eigen::VectorXd::Zero(phi.size())) {
  if (!phi.allFinite()) throw InputError("initial configuration has non-finite entries");
  if (clamp) {
    clamp->validate(phi.size());
    clamp_mask = clamp->mask;
    clamp->apply(phi);
  }
}

void ChainState::reset_counters() {
  accepted.setZero();
  proposed.setZero();
}

double ChainState::acceptance_rate() const {
  const double p = proposed.sum();
  return p > 0 ? accepted.sum() / p : 0.0;
}

void metropolis_sweep(const CouplingSetd& theta, ChainState& state) {
  const auto v = theta.volume();
  if (state.phi.size() != v) throw InputError("chain state does not match the coupling volume");
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (Eigen::Index i = 0; i < v; ++i) {
    if (state.clamp_mask[static_cast<std::size_t>(i)]) continue;
    const double proposal = state.phi(i) + state.proposal_widths(i) * state.normal(state.rng);
    const double delta = detail::action_delta_unchecked(theta, state.phi, i, proposal);
    state.proposed(i) += 1;
    if (delta <= 0 || uniform(state.rng) < std::exp(-delta)) {
      state.phi(i) = proposal;
      state.accepted(i) += 1;
    }
  }
  ++state.step_count;
}

void adapt_proposal_widths(ChainState& state, double target) {
  for (Eigen::Index i = 0; i < state.phi.size(); ++i) {
    if (state.proposed(i) == 0) continue;
    const double rate = state.accepted(i) / state.proposed(i);
    state.proposal_widths(i) *= std::exp(rate - target);
  }
  state.reset_counters();
}

Eigen::MatrixXd sample(const CouplingSetd& theta, const SamplerConfig& cfg, ChainState& state) {
  cfg.validate();
  if (std::none_of(state.clamp_mask.begin(), state.clamp_mask.end(), [](bool m) { return !m; }))
    throw InputError("every site is clamped; nothing to sample");

  state.reset_counters();
  for (int s = 0; s < cfg.sweeps_burn_in; ++s) {
    metropolis_sweep(theta, state);
    if (cfg.adapt_acceptance && (s + 1) % kAdaptInterval == 0)
      adapt_proposal_widths(state, *cfg.adapt_acceptance);
  }
  state.reset_counters();

  Eigen::MatrixXd out(cfg.n_samples, theta.volume());
  for (int n = 0; n < cfg.n_samples; ++n) {
    for (int s = 0; s < std::max(1, cfg.sweeps_between_samples); ++s)
      metropolis_sweep(theta, state);
    out.row(n) = state.phi.transpose();
  }
  return out;
}

Eigen::MatrixXd sample(const CouplingSetd& theta, const SamplerConfig& cfg,
                       const Eigen::VectorXd& initial, const std::optional<Clamp>& clamp,
                       std::uint64_t seed, int chains, unsigned threads) {
  if (chains < 1) throw InputError("need at least one chain");
  std::vector<Eigen::MatrixXd> per_chain(static_cast<std::size_t>(chains));
  parallel_for(per_chain.size(), threads, [&](std::size_t c) {
    ChainState state(initial, make_rng(seed, {0x5a4d, c}), cfg.proposal_width,
                     clamp ? &*clamp : nullptr);
    per_chain[c] = sample(theta, cfg, state);
  });
  Eigen::MatrixXd out(static_cast<Eigen::Index>(chains) * cfg.n_samples, theta.volume());
  for (std::size_t c = 0; c < per_chain.size(); ++c)
    out.middleRows(static_cast<Eigen::Index>(c) * cfg.n_samples, cfg.n_samples) = per_chain[c];
  return out;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw InputError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double batch_mean_stderr(const Eigen::Ref<const Eigen::VectorXd>& values, int batches) {
  const auto n = values.size();
  const auto per = n / std::max(1, batches);
  if (batches < 2 || per < 1) return std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd means(batches);
  for (int b = 0; b < batches; ++b) means(b) = values.segment(b * per, per).mean();
  const double m = means.mean();
  const double var = (means.array() - m).square().sum() / (batches - 1);
  return std::sqrt(var / batches);
}

Posterior summarize(const Eigen::MatrixXd& samples, const std::vector<Eigen::Index>& sites,
                    int batches) {
  if (samples.rows() < 1) throw InputError("no samples to summarize");
  Posterior p;
  p.sites = sites;
  const auto k = static_cast<Eigen::Index>(sites.size());
  p.mean.resize(k);
  p.stddev.resize(k);
  p.standard_error.resize(k);
  p.q05.resize(k);
  p.q50.resize(k);
  p.q95.resize(k);
  for (Eigen::Index m = 0; m < k; ++m) {
    const Eigen::VectorXd col = samples.col(sites[static_cast<std::size_t>(m)]);
    p.mean(m) = col.mean();
    p.stddev(m) = std::sqrt((col.array() - p.mean(m)).square().sum() /
                            std::max<Eigen::Index>(1, col.size() - 1));
    p.standard_error(m) = batch_mean_stderr(col, batches);
    std::vector<double> vals(col.data(), col.data() + col.size());
    p.q05(m) = quantile(vals, 0.05);
    p.q50(m) = quantile(vals, 0.50);
    p.q95(m) = quantile(std::move(vals), 0.95);
  }
  return p;
}

Posterior conditional_mean(const CouplingSetd& theta, const SamplerConfig& cfg, const Clamp& clamp,
                           std::uint64_t seed, int chains, unsigned threads) {
  clamp.validate(theta.volume());
  Eigen::VectorXd initial = clamp.values;
  for (Eigen::Index i = 0; i < initial.size(); ++i)
    if (!clamp.clamped(i)) initial(i) = 0.0;
  const auto samples = sample(theta, cfg, initial, clamp, seed, chains, threads);
  return summarize(samples, clamp.free_sites());
}

}  // namespace phi4
