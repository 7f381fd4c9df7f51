#include <doctest.h>

#include <sstream>

#include "cli.hpp"
#include "config.hpp"
#include "phi4/checkpoint.hpp"
#include "phi4/errors.hpp"
#include "phi4/io.hpp"
#include "phi4/rng.hpp"
#include "util.hpp"

using namespace phi4;
using testutil::fixture;
using testutil::slurp;
using testutil::synthetic_panel;
using testutil::TempDir;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::size_t count_lines(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (std::size_t pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto kv = cli::parse_key_values("# comment\nlearning_rate = 0.5  # trailing\n[sampler]\nn_samples = 3\n"
                                        "[forecast]\nwindow=20\n",
                                        "cfg");
  CHECK(kv.at("learning_rate") == "0.5");
  CHECK(kv.at("sampler.n_samples") == "3");
  auto cfg = cli::default_run_config();
  cli::apply_config(cfg, kv);
  CHECK(cfg.train.learning_rate == 0.5);
  CHECK(cfg.train.sampler.n_samples == 3);
  CHECK(cfg.forecast.window == 20);
  CHECK_THROWS_AS(cli::apply_config(cfg, {{"learning_rat", "1"}}), InputError);
  CHECK_THROWS_AS(cli::apply_config(cfg, {{"epochs", "ten"}}), InputError);
  CHECK_THROWS_AS(cli::parse_key_values("[open\n", "cfg"), InputError);
  CHECK_THROWS_AS(cli::parse_key_values("novalue\n", "cfg"), InputError);
}

TEST_CASE("ingest command") {
  TempDir dir;
  const auto out = (dir / "w.csv").string();
  auto r = run_cli({"ingest", "--input", fixture("prices_wide.csv"), "--format", "wide", "--out", out});
  REQUIRE(r.code == 0);
  const auto first = slurp(out);
  CHECK(read_panel_csv(out).size() == 3);
  CHECK(first.rfind("# phi4 0.1.0 | command=phi4 ingest", 0) == 0);
  r = run_cli({"ingest", "--input", fixture("prices_wide.csv"), "--format", "wide", "--out", out});
  CHECK(slurp(out) == first);

  CHECK(run_cli({"ingest", "--out", out}).code == 2);
  r = run_cli({"ingest", "--input", fixture("bad_width.csv"), "--out", out});
  CHECK(r.code == 2);
  CHECK(r.err.find(":3:") != std::string::npos);
  CHECK(run_cli({"ingest", "--input", fixture("prices_long.csv"), "--format", "tall", "--out", out}).code == 2);
  CHECK(run_cli({"nonsense"}).code == 2);
  CHECK(run_cli({"--help"}).code == 0);
}

TEST_CASE("train command") {
  TempDir dir;
  const auto panel = synthetic_panel(dir, 4, 300, 1).string();
  const auto ckpt = (dir / "m.json").string();
  const auto cfg = dir.file("c.toml", "epochs = 25\n[sampler]\nn_samples = 4\n").string();
  auto r = run_cli({"train", "--panel", panel, "--config", cfg, "--seed", "5", "--out", ckpt});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("final residuals") != std::string::npos);
  const auto first = slurp(ckpt);
  const auto m = load_checkpoint(ckpt);
  CHECK(m.theta.quartic().minCoeff() >= kLambdaMin);
  CHECK(m.training_metadata["train"]["seed"] == 5);
  CHECK(m.training_metadata["train"]["epochs"] == 25);

  const auto history = slurp(dir / "m.history.csv");
  CHECK(count_lines(history, "\n") == 25 + 2);

  r = run_cli({"train", "--panel", panel, "--config", cfg, "--seed", "5", "--out", ckpt, "--threads", "3"});
  CHECK(slurp(ckpt) == first);

  CHECK(run_cli({"train", "--panel", panel, "--out", ckpt, "--set", "bogus=1"}).code == 2);
  CHECK(run_cli({"train", "--panel", (dir / "missing.csv").string(), "--out", ckpt}).code == 2);
}

TEST_CASE("train reports divergence with exit 3") {
  TempDir dir;
  const auto panel = synthetic_panel(dir, 2, 50, 2).string();
  const auto r = run_cli({"train", "--panel", panel, "--out", (dir / "m.json").string(), "--set", "learning_rate=1e300",
                      "--set", "moment_source=quadrature", "--set", "epochs=5"});
  CHECK(r.code == 3);
  CHECK(r.err.find("epoch") != std::string::npos);
}

TEST_CASE("stats command emits labeled series") {
  TempDir dir;
  const auto panel = synthetic_panel(dir, 3, 80, 3).string();
  const auto out = (dir / "s.csv").string();
  const auto r = run_cli({"stats", "--panel", panel, "--binarize", "--window", "20", "--out", out, "--set", "epochs=20",
                      "--set", "sampling.sweeps_burn_in=50", "--set", "sampling.sweeps_between_samples=1"});
  REQUIRE(r.code == 0);
  const auto text = slurp(out);
  CHECK(count_lines(text, ",original\n") == 61);
  CHECK(count_lines(text, ",phi4\n") == 61);
  CHECK(count_lines(text, ",binarized\n") == 61);
  CHECK(text.find("date,market_mean_sma,market_kurtosis,source_label\n") != std::string::npos);
}

TEST_CASE("scaling command") {
  TempDir dir;
  const auto panel = synthetic_panel(dir, 8, 400, 4).string();
  const auto out = (dir / "sc.csv").string(), summary = (dir / "fit.csv").string();
  const auto r = run_cli({"scaling", "--panel", panel, "--volumes", "4,6,8", "--out", out, "--summary", summary, "--set",
                      "epochs=150", "--set", "learning_rate=0.05"});
  INFO(r.err);
  REQUIRE(r.code == 0);
  const auto points = read_csv(out);
  CHECK(points.rows.size() == 3);
  const auto fit = read_csv(summary);
  REQUIRE(fit.rows.size() == 2);
  CHECK(fit.rows[0][0] == "weights");
  CHECK(fit.rows[0].back() == "3");
}

TEST_CASE("impute, sample, forecast and baseline commands") {
  TempDir dir;
  const auto panel = synthetic_panel(dir, 3, 300, 5).string();
  const auto ckpt = (dir / "m.json").string();
  REQUIRE(run_cli({"train", "--panel", panel, "--out", ckpt, "--set", "epochs=40"}).code == 0);

  auto r = run_cli({"impute", "--checkpoint", ckpt, "--panel", panel, "--target", "T12", "--eval-from", "2000-10-01",
                "--eval-to", "2000-10-10", "--out", (dir / "i.csv").string(), "--summary", (dir / "is.csv").string(),
                "--set", "sampling.n_samples=200", "--set", "sampling.sweeps_burn_in=100"});
  INFO(r.err);
  REQUIRE(r.code == 0);
  const auto imp = read_csv(dir / "i.csv");
  CHECK(imp.header == std::vector<std::string>{"date", "truth", "phi4_mean", "phi4_q05", "phi4_q50", "phi4_q95",
                                               "baseline_value"});
  CHECK(imp.rows.size() == 10);
  CHECK(read_csv(dir / "is.csv").rows.size() == 2);
  CHECK(run_cli({"impute", "--checkpoint", ckpt, "--panel", panel, "--target", "NOPE", "--out",
             (dir / "i.csv").string()})
            .code == 2);

  r = run_cli({"sample", "--checkpoint", ckpt, "--out", (dir / "s.csv").string(), "--n-samples", "7", "--clamp",
           "T10=0.01"});
  REQUIRE(r.code == 0);
  const auto s = read_csv(dir / "s.csv");
  CHECK(s.rows.size() == 7);
  for (const auto& row : s.rows) CHECK(row[0] == "0.01");

  r = run_cli({"forecast", "--panel", panel, "--ticker", "T11", "--test-days", "3", "--out", (dir / "f.csv").string(),
           "--summary", (dir / "fs.csv").string(), "--set", "forecast.window=10", "--set", "forecast.train_window=40",
           "--set", "forecast.train.epochs=30", "--set", "forecast.sampler.n_samples=100"});
  INFO(r.err);
  REQUIRE(r.code == 0);
  CHECK(read_csv(dir / "f.csv").rows.size() == 3);
  CHECK(read_csv(dir / "fs.csv").rows.size() == 3);

  r = run_cli({"baseline", "--panel", panel, "--ticker", "T11", "--test-days", "50", "--windows", "25,50,100,200",
           "--out", (dir / "b.csv").string()});
  REQUIRE(r.code == 0);
  CHECK(read_csv(dir / "b.csv").rows.size() == 4);
  CHECK(run_cli({"baseline", "--panel", panel, "--out", (dir / "b.csv").string()}).code == 2);
}

TEST_CASE("validate command") {
  const auto r = run_cli({"validate", "--level", "quick"});
  CHECK(r.code == 0);
  CHECK(r.out.find("validation passed") != std::string::npos);
  CHECK(count_lines(r.out, "FAIL") == 0);
}
