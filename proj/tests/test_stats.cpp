#include <doctest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "phi4/errors.hpp"
#include "phi4/rng.hpp"
#include "phi4/stats.hpp"

using namespace phi4;

TEST_CASE("market series") {
  ReturnPanel p;
  p.tickers = {"A", "B"};
  p.dates = {"2020-01-01"};
  p.returns.resize(1, 2);
  p.returns << 0.01, 0.03;
  CHECK(market_series(p)(0) == doctest::Approx(0.02));
  CHECK(market_series(p.select({"A"}))(0) == 0.01);
  CHECK(market_series(p.select({"B", "A"}))(0) == market_series(p)(0));
  const auto b = market_series(binarize(p));
  CHECK(b.cwiseAbs().maxCoeff() <= 1.0);
}

TEST_CASE("kurtosis of simple series") {
  Eigen::VectorXd alt(10);
  for (int i = 0; i < 10; ++i) alt(i) = i % 2 ? 1.0 : -1.0;
  CHECK(pearson_kurtosis(alt) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::isnan(pearson_kurtosis(Eigen::VectorXd::Constant(5, 2.0))));
  CHECK_THROWS_AS(rolling_kurtosis(alt, 3), InputError);
  const auto r = rolling_kurtosis(alt, 4);
  CHECK(r.size() == 7);
}

TEST_CASE("Gaussian windows have kurtosis near 3") {
  auto rng = make_rng(3);
  std::normal_distribution<double> n(0, 1);
  Eigen::VectorXd x(20000);
  for (auto& v : x) v = n(rng);
  // Sampling SD of the kurtosis is about sqrt(24 / n).
  CHECK(std::abs(pearson_kurtosis(x) - 3.0) < 3 * std::sqrt(24.0 / 20000));
}

TEST_CASE("Student-t windows are heavy tailed on average") {
  auto rng = make_rng(4);
  std::student_t_distribution<double> t(5.0);
  Eigen::VectorXd x(250 * 40);
  for (auto& v : x) v = t(rng);
  const auto k = rolling_kurtosis(x, 250);
  double sum = 0;
  for (Eigen::Index i = 0; i < k.size(); i += 250) sum += k(i);
  CHECK(sum / 40 > 4.0);
}

TEST_CASE("kurtosis is scale invariant") {
  auto rng = make_rng(5);
  std::normal_distribution<double> n(0.2, 1);
  Eigen::VectorXd x(600);
  for (auto& v : x) v = n(rng);
  const auto a = rolling_kurtosis(x, 100);
  const auto b = rolling_kurtosis(Eigen::VectorXd(-37.5 * x), 100);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("binarized kurtosis depends only on the +1 fraction") {
  auto rng = make_rng(6);
  std::bernoulli_distribution coin(0.7);
  Eigen::VectorXd x(1000);
  for (auto& v : x) v = coin(rng) ? 1.0 : -1.0;
  const Eigen::Index w = 50;
  const auto k = rolling_kurtosis(x, w);
  for (Eigen::Index i = 0; i < k.size(); ++i) {
    const double p = (x.segment(i, w).array() > 0).cast<double>().mean();
    if (p == 0.0 || p == 1.0) {
      CHECK(std::isnan(k(i)));
      continue;
    }
    CHECK(std::abs(k(i) - oracle::two_point_kurtosis(p)) < 1e-10);
  }
}

TEST_CASE("pooled kurtosis uses every return in the window") {
  ReturnPanel p;
  p.tickers = {"A", "B"};
  auto rng = make_rng(7);
  std::normal_distribution<double> n(0, 1);
  p.returns.resize(30, 2);
  for (auto& v : p.returns.reshaped()) v = n(rng);
  for (int d = 0; d < 30; ++d) p.dates.push_back("d" + std::to_string(100 + d));
  const auto k = rolling_pooled_kurtosis(p, 10);
  REQUIRE(k.size() == 21);
  Eigen::VectorXd pooled(20);
  pooled << p.returns.block(5, 0, 10, 1), p.returns.block(5, 1, 10, 1);
  CHECK(k(5) == doctest::Approx(pearson_kurtosis(pooled)).epsilon(1e-12));
}

TEST_CASE("mae") {
  const Eigen::Vector3d t(0.1, -0.2, 0.3);
  CHECK(mae(t, t) == 0.0);
  CHECK(mae(Eigen::Vector3d(t.array() + 0.01), t) == doctest::Approx(0.01));
  const Eigen::Vector3d p(0.3, 0.0, -0.1);
  CHECK(mae(Eigen::Vector3d(p(2), p(0), p(1)), Eigen::Vector3d(t(2), t(0), t(1))) == doctest::Approx(mae(p, t)));
  CHECK_THROWS_AS(mae(t, Eigen::Vector2d(0, 0)), InputError);
}

TEST_CASE("market statistics align dates with window ends") {
  ReturnPanel p;
  p.tickers = {"A"};
  p.returns = Eigen::VectorXd::LinSpaced(8, 1, 8);
  for (int d = 1; d <= 8; ++d) p.dates.push_back("2020-01-0" + std::to_string(d));
  const auto s = market_statistics(p, "original", 4);
  CHECK(s.label == "original");
  CHECK(s.dates.front() == "2020-01-04");
  CHECK(s.mean_sma(0) == 2.5);
  CHECK(s.kurtosis.size() == 5);
}
