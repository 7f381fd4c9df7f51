#include "phi4/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "phi4/parallel.hpp"

namespace phi4 {

MomentAccumulator data_moments(const Eigen::Ref<const Eigen::MatrixXd>& configs) {
  if (configs.rows() < 1) throw InputError("data moments need at least one configuration");
  MomentAccumulator acc(configs.cols());
  for (Eigen::Index n = 0; n < configs.rows(); ++n) acc.add(configs.row(n).transpose());
  return acc;
}

ParameterBundled kl_gradient(const CouplingSetd& theta, const MomentEstimate& data,
                             const MomentEstimate& model) {
  const auto v = theta.volume();
  if (data.volume() != v || model.volume() != v)
    throw InputError("moment estimates do not match the coupling volume");
  ParameterBundled g;
  g.w = model.pair - data.pair;
  g.w.diagonal().setZero();
  g.mu = data.sq - model.sq;
  g.lambda = data.quart - model.quart;
  g.a = model.phi - data.phi;
  return g;
}

MomentResiduals moment_residuals(const MomentEstimate& data, const MomentEstimate& model) {
  MomentResiduals r;
  r.phi = (data.phi - model.phi).cwiseAbs().maxCoeff();
  Eigen::MatrixXd gap = (data.pair - model.pair).cwiseAbs();
  gap.diagonal().setZero();
  r.pair = gap.maxCoeff();
  r.sq = (data.sq - model.sq).cwiseAbs().maxCoeff();
  r.quart = (data.quart - model.quart).cwiseAbs().maxCoeff();
  return r;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0) || !std::isfinite(learning_rate))
    throw InputError("learning_rate must be positive");
  if (!(lambda_rate_scale > 0)) throw InputError("lambda_rate_scale must be positive");
  if (epochs < 1) throw InputError("epochs must be >= 1");
  if (chains < 1) throw InputError("chains must be >= 1");
  if (l2_weight_decay < 0) throw InputError("l2_weight_decay must be non-negative");
  if (averaging_fraction < 0 || averaging_fraction > 1)
    throw InputError("averaging_fraction must lie in [0, 1]");
  if (init.lambda_init < kLambdaMin) throw InputError("lambda_init is below lambda_min");
  if (init.w_init_std < 0) throw InputError("w_init_std must be non-negative");
  sampler.validate();
}

CouplingSetd initial_couplings(Eigen::Index volume, const InitSpec& init, std::uint64_t seed) {
  auto p = ParameterBundled::zeros(volume);
  auto rng = make_rng(seed, {0x1a17});
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < volume; ++i)
    for (Eigen::Index j = i + 1; j < volume; ++j) p.w(i, j) = init.w_init_std * normal(rng);
  symmetrize_from_upper(p.w);
  p.mu.setConstant(init.mu_init);
  p.lambda.setConstant(init.lambda_init);
  p.a.setConstant(init.a_init);
  return CouplingSetd(std::move(p));
}

MomentAccumulator estimate_model_moments(const CouplingSetd& theta, const SamplerConfig& cfg,
                                         int chains, std::uint64_t seed, unsigned threads,
                                         std::vector<MomentAccumulator>* per_chain) {
  std::vector<MomentAccumulator> accs(static_cast<std::size_t>(chains));
  parallel_for(accs.size(), threads, [&](std::size_t c) {
    ChainState state(Eigen::VectorXd::Zero(theta.volume()), make_rng(seed, {0x3e57, c}),
                     cfg.proposal_width);
    accs[c] = data_moments(sample(theta, cfg, state));
  });
  MomentAccumulator total(theta.volume());
  for (const auto& a : accs) total.merge(a);
  if (per_chain) *per_chain = std::move(accs);
  return total;
}

namespace {

std::string describe(const ParameterBundled& g) {
  std::ostringstream os;
  os << "max|grad| w=" << g.w.cwiseAbs().maxCoeff() << " mu=" << g.mu.cwiseAbs().maxCoeff()
     << " lambda=" << g.lambda.cwiseAbs().maxCoeff() << " a=" << g.a.cwiseAbs().maxCoeff();
  return os.str();
}

}  // namespace

TrainResult train(const Eigen::Ref<const Eigen::MatrixXd>& data, const TrainConfig& cfg,
                  const std::optional<CouplingSetd>& start) {
  cfg.validate();
  if (data.rows() < 1) throw InputError("training data is empty");
  if (!data.allFinite()) throw InputError("training data has non-finite entries");
  const auto v = data.cols();
  if (start && start->volume() != v) throw InputError("initial couplings do not match data width");
  if (cfg.moment_source == MomentSource::quadrature && v > 3)
    throw InputError("quadrature moments are limited to V <= 3");

  CouplingSetd theta = start ? *start : initial_couplings(v, cfg.init, cfg.seed);
  const MomentEstimate target = data_moments(data).means();

  const auto n_chains = static_cast<std::size_t>(cfg.chains);
  std::vector<ChainState> chains(n_chains);
  std::vector<MomentAccumulator> accs(n_chains);
  std::vector<double> rates(n_chains, 0.0);
  const int average_from =
      cfg.epochs - static_cast<int>(std::ceil(cfg.averaging_fraction * cfg.epochs));
  std::optional<ParameterBundled> average;
  int averaged = 0;

  TrainResult result;
  result.history.reserve(static_cast<std::size_t>(cfg.epochs));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    MomentEstimate model;
    double acceptance = 1.0;
    if (cfg.moment_source == MomentSource::quadrature) {
      try {
        model = quadrature_oracle(theta, cfg.quadrature).moments;
      } catch (const InputError& e) {
        // After an update the couplings are ours, so a failed grid means they ran away.
        if (epoch == 0) throw;
        throw DivergenceError(epoch, "quadrature failed at epoch " + std::to_string(epoch) + " (" + e.what() + ")");
      }
    } else {
      const bool fresh = !cfg.persistent || epoch == 0;
      parallel_for(n_chains, cfg.threads, [&](std::size_t c) {
        auto& state = chains[c];
        if (fresh) {
          auto rng = make_rng(cfg.seed, {0x7a1, static_cast<std::uint64_t>(epoch), c});
          const auto row = std::uniform_int_distribution<Eigen::Index>(0, data.rows() - 1)(rng);
          Eigen::VectorXd widths = state.proposal_widths;
          state = ChainState(data.row(row).transpose(), std::move(rng), cfg.sampler.proposal_width);
          if (widths.size() == v) state.proposal_widths = widths;
        }
        SamplerConfig per_epoch = cfg.sampler;
        if (!fresh) per_epoch.sweeps_burn_in = 0;
        accs[c] = data_moments(sample(theta, per_epoch, state));
        rates[c] = state.acceptance_rate();
        if (cfg.sampler.adapt_acceptance) adapt_proposal_widths(state, *cfg.sampler.adapt_acceptance);
      });
      MomentAccumulator total(v);
      acceptance = 0;
      for (std::size_t c = 0; c < n_chains; ++c) {
        total.merge(accs[c]);
        acceptance += rates[c] / static_cast<double>(n_chains);
      }
      model = total.means();
    }

    ParameterBundled grad = kl_gradient(theta, target, model);
    if (cfg.l2_weight_decay > 0) grad.w += cfg.l2_weight_decay * theta.weights();
    result.history.push_back({epoch, moment_residuals(target, model), acceptance});
    if (!grad.all_finite())
      throw DivergenceError(epoch, "non-finite gradient at epoch " + std::to_string(epoch) + " (" +
                                       describe(grad) + ")");

    ParameterBundled next = theta.params();
    next.w -= cfg.learning_rate * grad.w;
    next.mu -= cfg.learning_rate * grad.mu;
    next.lambda -= cfg.learning_rate * cfg.lambda_rate_scale * grad.lambda;
    next.a -= cfg.learning_rate * grad.a;
    next.lambda = next.lambda.cwiseMax(kLambdaMin);
    symmetrize_from_upper(next.w);
    if (!next.all_finite())
      throw DivergenceError(epoch, "couplings overflowed at epoch " + std::to_string(epoch) + " (" +
                                       describe(grad) + ")");
    theta = CouplingSetd(std::move(next));

    if (epoch >= average_from && cfg.averaging_fraction > 0) {
      if (!average) average = ParameterBundled::zeros(v);
      *average += theta.params();
      ++averaged;
    }
  }

  if (average) {
    *average *= 1.0 / averaged;
    symmetrize_from_upper(average->w);
    average->lambda = average->lambda.cwiseMax(kLambdaMin);
    theta = CouplingSetd(std::move(*average));
  }
  result.theta = std::move(theta);
  return result;
}

}  // namespace phi4
