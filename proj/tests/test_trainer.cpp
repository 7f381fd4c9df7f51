#include <doctest.h>

#include "phi4/errors.hpp"
#include "phi4/trainer.hpp"
#include "phi4/validate.hpp"

using namespace phi4;

TEST_CASE("train config validation") {
  TrainConfig c;
  c.learning_rate = 0;
  CHECK_THROWS_AS(c.validate(), InputError);
  c = TrainConfig{};
  c.epochs = 0;
  CHECK_THROWS_AS(c.validate(), InputError);
  c = TrainConfig{};
  c.chains = 0;
  CHECK_THROWS_AS(c.validate(), InputError);
  c = TrainConfig{};
  c.init.lambda_init = 0.0;
  CHECK_THROWS_AS(c.validate(), InputError);
  c = TrainConfig{};
  c.l2_weight_decay = -1;
  CHECK_THROWS_AS(c.validate(), InputError);
  CHECK_THROWS_AS(train(Eigen::MatrixXd(0, 2), TrainConfig{}), InputError);
}

TEST_CASE("initial couplings follow the init spec") {
  InitSpec init;
  const auto t = initial_couplings(5, init, 3);
  CHECK(t.mass_sq() == Eigen::VectorXd::Constant(5, 0.5));
  CHECK(t.quartic() == Eigen::VectorXd::Constant(5, 0.5));
  CHECK(t.bias().isZero(0.0));
  CHECK(t.weights().cwiseAbs().maxCoeff() < 0.06);
  CHECK(t.weights().cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("lambda stays above its floor and history has one row per epoch") {
  // Very peaked data pushes lambda down hard.
  Eigen::MatrixXd data(50, 2);
  auto rng = make_rng(4);
  std::normal_distribution<double> n(0.0, 0.05);
  for (auto& x : data.reshaped()) x = n(rng);
  TrainConfig c;
  c.epochs = 60;
  c.learning_rate = 0.2;
  c.lambda_rate_scale = 1.0;
  c.threads = 1;
  const auto r = train(data, c);
  CHECK(r.history.size() == 60);
  CHECK(r.theta.quartic().minCoeff() >= kLambdaMin);
}

TEST_CASE("mean residual shrinks on a repeated configuration") {
  Eigen::MatrixXd data(20, 2);
  data.rowwise() = Eigen::RowVector2d(1.0, -0.5);
  TrainConfig c;
  c.epochs = 10;
  c.learning_rate = 1e-3;
  c.moment_source = MomentSource::quadrature;
  const auto r = train(data, c);
  for (std::size_t e = 1; e < r.history.size(); ++e)
    CHECK(r.history[e].residuals.phi < r.history[e - 1].residuals.phi);
}

TEST_CASE("symmetric data leaves biases at the noise floor") {
  auto rng = make_rng(5);
  Eigen::MatrixXd half(200, 3);
  std::normal_distribution<double> n(0.0, 1.0);
  for (auto& x : half.reshaped()) x = n(rng);
  Eigen::MatrixXd data(400, 3);
  data << half, -half;

  TrainConfig c;
  c.epochs = 300;
  c.learning_rate = 0.05;
  c.threads = 1;
  const auto r = train(data, c);

  // Noise floor: spread of the a-gradient estimate at the learned couplings.
  std::vector<MomentAccumulator> per_chain;
  estimate_model_moments(r.theta, c.sampler, 64, 77, 1, &per_chain);
  Eigen::MatrixXd phis(64, 3);
  for (int k = 0; k < 64; ++k) phis.row(k) = per_chain[k].means().phi.transpose();
  const Eigen::RowVectorXd mean = phis.colwise().mean();
  const Eigen::RowVectorXd sd = ((phis.rowwise() - mean).array().square().colwise().sum() / 63.0).sqrt();
  const double se = sd.maxCoeff() / std::sqrt(static_cast<double>(c.chains));
  CHECK(r.theta.bias().cwiseAbs().maxCoeff() < 3 * se);
}

TEST_CASE("training is deterministic and independent of threads") {
  auto rng = make_rng(6);
  const auto star = random_couplings(3, rng);
  const auto data = sample(star, SamplerConfig{0.8, 200, 5, 500, 0.44}, Eigen::VectorXd::Zero(3), std::nullopt, 1);
  TrainConfig c;
  c.epochs = 40;
  c.threads = 1;
  const auto a = train(data, c);
  c.threads = 4;
  const auto b = train(data, c);
  CHECK(a.theta.params().w == b.theta.params().w);
  CHECK(a.theta.params().mu == b.theta.params().mu);
  CHECK(a.theta.params().lambda == b.theta.params().lambda);
  CHECK(a.theta.params().a == b.theta.params().a);
  CHECK(a.history.back().acceptance_rate == b.history.back().acceptance_rate);
}

TEST_CASE("permuting stocks permutes the learned couplings") {
  // Exact under quadrature moments; the MCMC path is covered statistically
  // by the self-consistency acceptance check.
  auto rng = make_rng(8);
  const auto star = random_couplings(3, rng);
  const auto data = sample(star, SamplerConfig{0.8, 200, 5, 400, 0.44}, Eigen::VectorXd::Zero(3), std::nullopt, 2);
  Eigen::PermutationMatrix<3> perm;
  perm.indices() << 1, 2, 0;
  const Eigen::MatrixXd permuted = data * perm.transpose();

  TrainConfig c;
  c.epochs = 30;
  c.learning_rate = 0.05;
  c.moment_source = MomentSource::quadrature;
  c.init.w_init_std = 0;
  c.quadrature.points = 61;  // exactness does not need accuracy
  const auto a = train(data, c).theta.params();
  const auto b = train(permuted, c).theta.params();
  CHECK((perm * a.mu - b.mu).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((perm * a.a - b.a).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((perm * a.lambda - b.lambda).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((perm * a.w * perm.transpose() - b.w).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("quadrature moments converge on a V=2 target") {
  auto rng = make_rng(9);
  const auto star = random_couplings(2, rng);
  const auto data = sample(star, SamplerConfig{0.8, 500, 5, 4000, 0.44}, Eigen::VectorXd::Zero(2), std::nullopt, 3, 4);
  TrainConfig c;
  c.epochs = 3000;
  c.learning_rate = 0.1;
  c.lambda_rate_scale = 1.0;
  c.moment_source = MomentSource::quadrature;
  const auto r = train(data, c);
  const auto& res = r.history.back().residuals;
  CHECK(res.phi < 1e-3);
  CHECK(res.pair < 1e-3);
  CHECK(res.sq < 1e-3);
  CHECK(res.quart < 1e-2);
}

TEST_CASE("divergence is reported with the epoch") {
  Eigen::MatrixXd data(10, 1);
  data.setConstant(1e200);
  TrainConfig c;
  c.epochs = 5;
  c.moment_source = MomentSource::quadrature;
  try {
    train(data, c);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.epoch() == 0);
  }
}
