#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "phi4/errors.hpp"
#include "phi4/rng.hpp"
#include "phi4/scaling.hpp"

using namespace phi4;

namespace {

std::vector<std::pair<double, double>> power_law(const std::vector<double>& vs, double c, double k) {
  std::vector<std::pair<double, double>> pts;
  for (double v : vs) pts.emplace_back(v, c * std::pow(v, k));
  return pts;
}

ReturnPanel named_panel(int tickers) {
  ReturnPanel p;
  for (int i = 0; i < tickers; ++i) p.tickers.push_back("S" + std::to_string(100 + i));
  p.dates = {"2020-01-01", "2020-01-02"};
  p.returns = Eigen::MatrixXd::Zero(2, tickers);
  return p;
}

}  // namespace

TEST_CASE("coupling means") {
  auto p = ParameterBundled::zeros(3);
  p.lambda.setConstant(1);
  p.w(0, 1) = p.w(1, 0) = 0.1;
  p.w(0, 2) = p.w(2, 0) = 0.2;
  p.w(1, 2) = p.w(2, 1) = 0.3;
  p.a << -0.2, -0.2, -0.2;
  const auto m = coupling_means(CouplingSetd(p));
  CHECK(m.mean_w == doctest::Approx(0.2));
  CHECK(m.mean_a == doctest::Approx(-0.2));

  auto q = ParameterBundled::zeros(2);
  q.lambda.setConstant(1);
  q.a << 0.4, -0.4;
  CHECK(coupling_means(CouplingSetd(q)).mean_a == 0.0);
  CHECK_THROWS_AS(coupling_means(CouplingSetd::uniform(1, 1, 1)), InputError);
}

TEST_CASE("power-law fit is exact on noiseless data") {
  const auto f = powerlaw_fit(power_law({16, 32, 48, 64}, 3.0, -0.5));
  CHECK(std::abs(f.exponent + 0.5) < 1e-12);
  CHECK(f.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.prefactor == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(f.sign == 1);

  const auto neg = powerlaw_fit(power_law({4, 8, 16}, -0.7, -1.3));
  CHECK(neg.sign == -1);
  CHECK(std::abs(neg.exponent + 1.3) < 1e-12);

  const auto two = powerlaw_fit({{16, 1.0}, {32, 0.5}});
  CHECK(two.exponent == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(two.r_squared == doctest::Approx(1.0));
  CHECK(std::isnan(two.stderr_k));
}

TEST_CASE("power-law fit preconditions") {
  CHECK_THROWS_AS(powerlaw_fit({{16, 1.0}}), InputError);
  CHECK_THROWS_AS(powerlaw_fit({{16, 1.0}, {32, -0.5}}), InputError);
  CHECK_THROWS_AS(powerlaw_fit({{16, 1.0}, {32, 0.0}}), InputError);
  CHECK_THROWS_AS(powerlaw_fit({{16, 1.0}, {16, 0.5}}), InputError);
  CHECK_THROWS_AS(powerlaw_fit({{-16, 1.0}, {16, 0.5}}), InputError);
}

TEST_CASE("scaling y leaves the exponent unchanged") {
  auto rng = make_rng(1);
  std::normal_distribution<double> n(0, 0.05);
  std::vector<std::pair<double, double>> pts;
  for (double v : {10.0, 20.0, 35.0, 60.0}) pts.emplace_back(v, std::pow(v, -0.8) * std::exp(n(rng)));
  auto scaled = pts;
  for (auto& p : scaled) p.second *= 123.0;
  const auto a = powerlaw_fit(pts), b = powerlaw_fit(scaled);
  CHECK(std::abs(a.exponent - b.exponent) < 1e-12);
  CHECK(b.prefactor == doctest::Approx(123.0 * a.prefactor));
}

TEST_CASE("four-point coverage follows Student t with two degrees of freedom") {
  // P(|t_2| < 3) = 3 / sqrt(11) = 0.9045.
  auto rng = make_rng(2);
  std::normal_distribution<double> noise(0.0, 0.01);
  int covered = 0;
  const int trials = 4000;
  for (int t = 0; t < trials; ++t) {
    std::vector<std::pair<double, double>> pts;
    for (double v : {16.0, 32.0, 48.0, 64.0}) pts.emplace_back(v, 2.0 * std::pow(v, -0.9) * (1 + noise(rng)));
    const auto f = powerlaw_fit(pts);
    covered += std::abs(f.exponent + 0.9) < 3 * f.stderr_k;
  }
  const double rate = static_cast<double>(covered) / trials;
  const double expected = 3.0 / std::sqrt(11.0);
  CHECK(std::abs(rate - expected) < 4 * std::sqrt(expected * (1 - expected) / trials));
}

TEST_CASE("nested subsets") {
  const std::vector<std::string> tickers{"D", "B", "A", "C", "E"};
  const auto alpha = choose_subsets(tickers, {2, 4}, SubsetRule{}, 1);
  CHECK(alpha[0][0] == std::vector<std::string>{"A", "B"});
  CHECK(alpha[1][0] == std::vector<std::string>{"A", "B", "C", "D"});

  SubsetRule random{SubsetRule::Kind::nested_random, 3};
  const auto r = choose_subsets(tickers, {2, 3}, random, 9);
  REQUIRE(r[0].size() == 3);
  for (int d = 0; d < 3; ++d)
    CHECK(std::equal(r[0][d].begin(), r[0][d].end(), r[1][d].begin()));
  CHECK(r == choose_subsets(tickers, {2, 3}, random, 9));

  CHECK_THROWS_AS(choose_subsets(tickers, {3, 2}, SubsetRule{}, 1), InputError);
  CHECK_THROWS_AS(choose_subsets(tickers, {2, 6}, SubsetRule{}, 1), InputError);
}

TEST_CASE("scaling run recovers an injected exponent") {
  // The hook returns couplings whose mean weight is exactly 0.8 / V.
  PanelTrainer inject = [](const ReturnPanel& sub, std::uint64_t) {
    const auto v = sub.size();
    auto p = ParameterBundled::zeros(v);
    p.lambda.setConstant(1);
    p.w.setConstant(0.8 / static_cast<double>(v));
    p.w.diagonal().setZero();
    p.a.setConstant(-0.3 * std::pow(static_cast<double>(v), -0.5));
    return CouplingSetd(p);
  };
  const auto r = scaling_run(named_panel(64), {16, 32, 48, 64}, SubsetRule{}, inject, 1, 2);
  REQUIRE(r.weights);
  REQUIRE(r.biases);
  CHECK(std::abs(r.weights->exponent + 1.0) < 1e-9);
  CHECK(std::abs(r.biases->exponent + 0.5) < 1e-9);
  CHECK(r.biases->sign == -1);
  CHECK_FALSE(r.failure);
}

TEST_CASE("scaling run keeps partial results on failure") {
  PanelTrainer flaky = [](const ReturnPanel& sub, std::uint64_t) {
    if (sub.size() == 6) throw DivergenceError(3, "boom");
    return CouplingSetd::uniform(sub.size(), 1.0, 1.0);
  };
  const auto r = scaling_run(named_panel(8), {4, 6, 8}, SubsetRule{}, flaky, 1, 1);
  REQUIRE(r.failure);
  CHECK(r.points.size() == 1);
  CHECK(r.points[0].volume == 4);
  CHECK_FALSE(r.weights);
}
