#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "config.hpp"
#include "phi4/checkpoint.hpp"
#include "phi4/data.hpp"
#include "phi4/errors.hpp"
#include "phi4/forecast.hpp"
#include "phi4/io.hpp"
#include "phi4/parallel.hpp"
#include "phi4/sampler.hpp"
#include "phi4/scaling.hpp"
#include "phi4/stats.hpp"
#include "phi4/trainer.hpp"
#include "phi4/validate.hpp"

namespace phi4::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

// Thread count is not part of the recorded command: outputs must not depend on it.
std::string command_line(const std::vector<std::string>& args) {
  std::string s = "phi4";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--threads") {
      ++i;
      continue;
    }
    if (args[i].rfind("--threads=", 0) == 0) continue;
    s += ' ';
    s += args[i];
  }
  return s;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot write '" + path.string() + "'");
  return os;
}

template <class T>
std::vector<T> parse_list(const std::string& text, const std::string& what) {
  std::vector<T> out;
  for (const auto& item : split_csv_line(text)) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(static_cast<T>(v));
    } catch (const std::exception&) {
      throw InputError(what + ": not an integer list: '" + text + "'");
    }
  }
  if (out.empty()) throw InputError(what + " is empty");
  return out;
}

// Settings shared by most commands.
struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::vector<std::string> overrides;  // key=value
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "key = value config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "random seed");
  cmd->add_option("--threads", c.threads, "worker threads, 0 = all cores");
  cmd->add_option("--set", c.overrides, "override one config key, key=value");
}

RunConfig resolve(const Common& c) {
  RunConfig cfg = c.config.empty() ? default_run_config() : load_run_config(c.config);
  std::map<std::string, std::string> kv;
  for (const auto& o : c.overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw InputError("--set expects key=value, got '" + o + "'");
    kv[o.substr(0, eq)] = o.substr(eq + 1);
  }
  apply_config(cfg, kv);
  if (c.seed) {
    cfg.train.seed = *c.seed;
    cfg.forecast.seed = *c.seed;
  }
  const unsigned threads = resolve_threads(c.threads);
  cfg.train.threads = threads;
  cfg.forecast.threads = threads;
  return cfg;
}

std::vector<fs::path> with_config(std::vector<fs::path> inputs, const Common& c) {
  if (!c.config.empty()) inputs.emplace_back(c.config);
  return inputs;
}

Provenance provenance(const std::string& cmd, std::uint64_t seed, const std::vector<fs::path>& inputs) {
  return {cmd, seed, inputs_checksum(inputs)};
}

json sampler_json(const SamplerConfig& s) {
  json j;
  j["proposal_width"] = s.proposal_width;
  j["sweeps_burn_in"] = s.sweeps_burn_in;
  j["sweeps_between_samples"] = s.sweeps_between_samples;
  j["n_samples"] = s.n_samples;
  j["adapt_acceptance"] = s.adapt_acceptance ? json(*s.adapt_acceptance) : json(nullptr);
  return j;
}

json train_json(const TrainConfig& t) {
  json j;
  j["learning_rate"] = t.learning_rate;
  j["lambda_rate_scale"] = t.lambda_rate_scale;
  j["epochs"] = t.epochs;
  j["chains"] = t.chains;
  j["persistent"] = t.persistent;
  j["sampler"] = sampler_json(t.sampler);
  j["init"] = {{"w_init_std", t.init.w_init_std},
               {"a_init", t.init.a_init},
               {"mu_init", t.init.mu_init},
               {"lambda_init", t.init.lambda_init}};
  j["seed"] = t.seed;
  j["l2_weight_decay"] = t.l2_weight_decay;
  j["averaging_fraction"] = t.averaging_fraction;
  j["moment_source"] = t.moment_source == MomentSource::mcmc ? "mcmc" : "quadrature";
  return j;
}

json residuals_json(const MomentResiduals& r) {
  return {{"phi", r.phi}, {"pair", r.pair}, {"sq", r.sq}, {"quart", r.quart}};
}

// Trains on the panel's daily return vectors, z-scored when configured.
Model fit_panel(const ReturnPanel& panel, const RunConfig& cfg, std::vector<EpochDiagnostics>* history) {
  Model model;
  model.tickers = panel.tickers;
  Eigen::MatrixXd data = panel.returns;
  if (cfg.standardize) {
    model.standardizer = Standardizer::fit(panel.returns);
    data = model.standardizer->apply(panel.returns);
  }
  auto result = train(data, cfg.train);
  model.theta = result.theta;
  json md;
  md["train"] = train_json(cfg.train);
  md["days"] = panel.days();
  md["first_date"] = panel.dates.front();
  md["last_date"] = panel.dates.back();
  if (!result.history.empty()) md["final_residuals"] = residuals_json(result.history.back().residuals);
  model.training_metadata = std::move(md);
  if (history) *history = std::move(result.history);
  return model;
}

// Unconditional model draws in return units, one row per sample.
Eigen::MatrixXd draw(const Model& model, const SamplerConfig& cfg, const std::optional<Clamp>& clamp,
                     std::uint64_t seed, int chains, unsigned threads) {
  Eigen::VectorXd init = Eigen::VectorXd::Zero(model.theta.volume());
  if (clamp) clamp->apply(init);
  Eigen::MatrixXd s = sample(model.theta, cfg, init, clamp, seed, chains, threads);
  if (model.standardizer) {
    for (Eigen::Index j = 0; j < s.cols(); ++j)
      for (Eigen::Index i = 0; i < s.rows(); ++i) s(i, j) = model.standardizer->invert(j, s(i, j));
  }
  return s;
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
  return s;
}

void write_prediction_row(std::ostream& os, const std::string& date, double truth, const Prediction& p,
                          double baseline) {
  os << date << ',' << format_double(truth) << ',' << format_double(p.mean) << ','
     << format_double(p.q05) << ',' << format_double(p.q50) << ',' << format_double(p.q95) << ','
     << format_double(baseline) << '\n';
}

constexpr const char* kPredictionHeader = "date,truth,phi4_mean,phi4_q05,phi4_q50,phi4_q95,baseline_value\n";

// Mean absolute error over the entries where both values are finite.
std::pair<double, std::size_t> finite_mae(const std::vector<double>& pred, const std::vector<double>& truth) {
  double sum = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!std::isfinite(pred[i]) || !std::isfinite(truth[i])) continue;
    sum += std::abs(pred[i] - truth[i]);
    ++n;
  }
  return {n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN(), n};
}

// Evaluation days of one series: the last `count` days, or every day from `from`.
std::vector<Eigen::Index> evaluation_days(const ReturnPanel& panel, std::optional<Eigen::Index> count,
                                          const std::optional<std::string>& from,
                                          const std::optional<std::string>& to) {
  std::vector<Eigen::Index> days;
  const auto n = panel.days();
  if (from) {
    for (Eigen::Index t = 0; t < n; ++t) {
      const auto& d = panel.dates[static_cast<std::size_t>(t)];
      if (d >= *from && (!to || d <= *to)) days.push_back(t);
    }
  } else {
    const auto c = count.value_or(200);
    if (c < 1 || c > n) throw InputError("--test-days must be between 1 and the panel length");
    for (Eigen::Index t = n - c; t < n; ++t) days.push_back(t);
  }
  if (days.empty()) throw InputError("no evaluation days selected");
  return days;
}

// ---------------------------------------------------------------- commands

struct IngestArgs {
  std::vector<std::string> inputs;
  std::string format = "long";
  std::string out;
  LongSchema schema;
};

int cmd_ingest(const IngestArgs& a, const std::string& cmd, std::ostream& out) {
  PriceTable table;
  std::vector<fs::path> paths(a.inputs.begin(), a.inputs.end());
  for (const auto& p : paths) {
    if (a.format == "long")
      table.merge(ingest_csv(p, a.schema));
    else
      table.merge(ingest_wide_csv(p, a.schema.date_col));
  }
  AlignmentReport report;
  const auto panel = log_returns(table, &report);
  auto os = open_output(a.out);
  write_panel_csv(os, panel, provenance(cmd, 0, paths));
  out << "tickers=" << panel.size() << " days=" << panel.days()
      << " dropped_dates=" << report.dropped_dates.size() << '\n';
  return 0;
}

struct TrainArgs {
  Common common;
  std::string panel;
  std::string out;
  std::string history;
};

int cmd_train(const TrainArgs& a, const std::string& cmd, std::ostream& out) {
  const auto cfg = resolve(a.common);
  const auto panel = read_panel_csv(a.panel);
  std::vector<EpochDiagnostics> history;
  const auto model = fit_panel(panel, cfg, &history);
  const auto meta = provenance(cmd, cfg.train.seed, with_config({a.panel}, a.common));
  save_checkpoint(a.out, model, meta);

  const fs::path hist_path = a.history.empty() ? fs::path(a.out).replace_extension(".history.csv") : fs::path(a.history);
  auto hs = open_output(hist_path);
  hs << meta.header_line() << '\n'
     << "epoch,residual_phi,residual_pair,residual_sq,residual_quart,acceptance_rate\n";
  for (const auto& h : history) {
    hs << h.epoch << ',' << format_double(h.residuals.phi) << ',' << format_double(h.residuals.pair) << ','
       << format_double(h.residuals.sq) << ',' << format_double(h.residuals.quart) << ','
       << format_double(h.acceptance_rate) << '\n';
  }
  if (!history.empty()) {
    const auto& r = history.back().residuals;
    out << "final residuals: phi=" << format_double(r.phi) << " pair=" << format_double(r.pair)
        << " sq=" << format_double(r.sq) << " quart=" << format_double(r.quart) << '\n';
  }
  return 0;
}

struct SampleArgs {
  Common common;
  std::string checkpoint;
  std::string out;
  std::vector<std::string> clamps;  // TICKER=value
  int chains = 1;
  std::optional<int> n_samples;
};

int cmd_sample(const SampleArgs& a, const std::string& cmd, std::ostream& out) {
  const auto cfg = resolve(a.common);
  const auto model = load_checkpoint(a.checkpoint);
  SamplerConfig sc = cfg.sampling;
  if (a.n_samples) sc.n_samples = *a.n_samples;
  std::optional<Clamp> clamp;
  if (!a.clamps.empty()) {
    clamp = Clamp::none(model.theta.volume());
    for (const auto& c : a.clamps) {
      const auto eq = c.find('=');
      if (eq == std::string::npos) throw InputError("--clamp expects TICKER=value, got '" + c + "'");
      const auto name = c.substr(0, eq);
      const auto it = std::find(model.tickers.begin(), model.tickers.end(), name);
      if (it == model.tickers.end()) throw InputError("unknown ticker '" + name + "' in --clamp");
      const auto site = it - model.tickers.begin();
      double v = parse_double(c.substr(eq + 1), "--clamp " + name);
      if (model.standardizer) v = model.standardizer->apply(site, v);
      clamp->mask[static_cast<std::size_t>(site)] = true;
      clamp->values(site) = v;
    }
  }
  const auto s = draw(model, sc, clamp, cfg.train.seed, a.chains, cfg.train.threads);
  auto os = open_output(a.out);
  os << provenance(cmd, cfg.train.seed, with_config({a.checkpoint}, a.common)).header_line() << '\n'
     << join(model.tickers) << '\n';
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    for (Eigen::Index j = 0; j < s.cols(); ++j) os << (j ? "," : "") << format_double(s(i, j));
    os << '\n';
  }
  out << "samples=" << s.rows() << " sites=" << s.cols() << '\n';
  return 0;
}

struct StatsArgs {
  Common common;
  std::string panel;
  std::string checkpoint;
  std::string out;
  bool binarize = false;
  bool skip_model = false;
  Eigen::Index window = 250;
  std::string kurtosis = "market";
};

void write_stats(std::ostream& os, const MarketStatistics& s) {
  for (Eigen::Index i = 0; i < s.kurtosis.size(); ++i) {
    os << s.dates[static_cast<std::size_t>(i)] << ',' << format_double(s.mean_sma(i)) << ','
       << format_double(s.kurtosis(i)) << ',' << s.label << '\n';
  }
}

int cmd_stats(const StatsArgs& a, const std::string& cmd, std::ostream& out) {
  const auto cfg = resolve(a.common);
  const auto panel = read_panel_csv(a.panel);
  const auto mode = a.kurtosis == "pooled" ? KurtosisMode::pooled : KurtosisMode::market;
  std::vector<fs::path> inputs{a.panel};
  if (!a.checkpoint.empty()) inputs.emplace_back(a.checkpoint);

  std::vector<MarketStatistics> series;
  series.push_back(market_statistics(panel, "original", a.window, mode));
  if (!a.skip_model) {
    Model model = a.checkpoint.empty() ? fit_panel(panel, cfg, nullptr) : load_checkpoint(a.checkpoint);
    const ReturnPanel used = panel.select(model.tickers);
    SamplerConfig sc = cfg.sampling;
    sc.n_samples = static_cast<int>(used.days());
    ReturnPanel synthetic = used;
    synthetic.returns = draw(model, sc, std::nullopt, cfg.train.seed, 1, 1);
    series.push_back(market_statistics(synthetic, "phi4", a.window, mode));
  }
  if (a.binarize) series.push_back(market_statistics(binarize(panel), "binarized", a.window, mode));

  auto os = open_output(a.out);
  os << provenance(cmd, cfg.train.seed, with_config(inputs, a.common)).header_line() << '\n'
     << "# kurtosis=pearson mode=" << a.kurtosis << " window=" << a.window << '\n'
     << "date,market_mean_sma,market_kurtosis,source_label\n";
  for (const auto& s : series) write_stats(os, s);
  for (const auto& s : series) {
    int above = 0, finite = 0;
    for (Eigen::Index i = 0; i < s.kurtosis.size(); ++i) {
      if (!std::isfinite(s.kurtosis(i))) continue;
      ++finite;
      above += s.kurtosis(i) > 4;
    }
    out << s.label << ": windows=" << s.kurtosis.size() << " kurtosis_above_4=" << above << '/' << finite << '\n';
  }
  return 0;
}

struct ScalingArgs {
  Common common;
  std::string panel;
  std::string volumes;
  std::string subset = "alphabetical";
  int draws = 1;
  std::string out;
  std::string summary;
};

int cmd_scaling(const ScalingArgs& a, const std::string& cmd, std::ostream& out, std::ostream& err) {
  const auto cfg = resolve(a.common);
  const auto panel = read_panel_csv(a.panel);
  const auto volumes = parse_list<Eigen::Index>(a.volumes, "--volumes");
  SubsetRule rule;
  rule.kind = a.subset == "random" ? SubsetRule::Kind::nested_random : SubsetRule::Kind::nested_alphabetical;
  rule.draws = a.draws;
  TrainConfig tc = cfg.train;
  tc.threads = 1;
  const bool standardize = cfg.standardize;
  PanelTrainer trainer = [tc, standardize](const ReturnPanel& sub, std::uint64_t seed) {
    TrainConfig c = tc;
    c.seed = seed;
    if (!standardize) return train(sub.returns, c).theta;
    // Scale only: centering would erase the sign of the biases being fitted.
    auto z = Standardizer::fit(sub.returns);
    z.mean.setZero();
    return train(z.apply(sub.returns), c).theta;
  };
  const auto result = scaling_run(panel, volumes, rule, trainer, cfg.train.seed, cfg.train.threads);

  const auto header = provenance(cmd, cfg.train.seed, with_config({a.panel}, a.common)).header_line();
  auto os = open_output(a.out);
  os << header << '\n' << "V,mean_w,mean_a\n";
  for (const auto& p : result.points)
    os << p.volume << ',' << format_double(p.means.mean_w) << ',' << format_double(p.means.mean_a) << '\n';
  if (!a.summary.empty()) {
    auto ss = open_output(a.summary);
    ss << header << '\n' << "family,k,stderr,r_squared,sign,prefactor,points\n";
    auto row = [&](const char* name, const std::optional<FitResult>& f) {
      if (!f) return;
      ss << name << ',' << format_double(f->exponent) << ',' << format_double(f->stderr_k) << ','
         << format_double(f->r_squared) << ',' << f->sign << ',' << format_double(f->prefactor) << ','
         << f->points.size() << '\n';
    };
    row("weights", result.weights);
    row("biases", result.biases);
  }
  for (const auto& [name, f] : {std::pair{"weights", result.weights}, std::pair{"biases", result.biases}}) {
    if (f) out << name << ": k=" << format_double(f->exponent) << " stderr=" << format_double(f->stderr_k) << '\n';
  }
  if (result.failure) {
    err << "scaling failed: " << *result.failure << " (completed points were written)\n";
    return 1;
  }
  return 0;
}

struct ImputeArgs {
  Common common;
  std::string checkpoint;
  std::string panel;
  std::string target;
  std::optional<std::string> eval_from;
  std::optional<std::string> eval_to;
  int chains = 1;
  std::string out;
  std::string summary;
};

int cmd_impute(const ImputeArgs& a, const std::string& cmd, std::ostream& out) {
  const auto cfg = resolve(a.common);
  const auto model = load_checkpoint(a.checkpoint);
  const auto panel = read_panel_csv(a.panel).select(model.tickers);
  const auto target_col = panel.column(a.target);

  // Sigmas come from the days before the evaluation period.
  Eigen::Index first_eval = 0;
  if (a.eval_from) {
    while (first_eval < panel.days() && panel.dates[static_cast<std::size_t>(first_eval)] < *a.eval_from)
      ++first_eval;
  }
  const Eigen::Index sigma_rows = first_eval >= 2 ? first_eval : panel.days();
  if (sigma_rows < 2) throw InputError("need at least two days to estimate sigmas");
  const auto sigma_panel = panel.rows(0, sigma_rows);
  Eigen::VectorXd sigma(panel.size());
  for (Eigen::Index j = 0; j < panel.size(); ++j) {
    const auto col = sigma_panel.returns.col(j);
    const double m = col.mean();
    sigma(j) = std::sqrt((col.array() - m).square().sum() / static_cast<double>(col.size() - 1));
  }

  std::vector<Eigen::Index> days;
  for (Eigen::Index t = first_eval; t < panel.days(); ++t) {
    if (a.eval_to && panel.dates[static_cast<std::size_t>(t)] > *a.eval_to) break;
    days.push_back(t);
  }
  if (days.empty()) throw InputError("no evaluation days selected");

  std::vector<Prediction> preds(days.size());
  std::vector<double> baseline(days.size()), truth(days.size());
  parallel_for(days.size(), cfg.train.threads, [&](std::size_t k) {
    const auto t = days[k];
    std::map<std::string, double> observed;
    std::vector<double> obs, sig;
    for (Eigen::Index j = 0; j < panel.size(); ++j) {
      if (j == target_col) continue;
      observed[panel.tickers[static_cast<std::size_t>(j)]] = panel.returns(t, j);
      obs.push_back(panel.returns(t, j));
      sig.push_back(sigma(j));
    }
    preds[k] = impute(model, a.target, observed, cfg.sampling,
                      make_rng(cfg.train.seed, {0x1a9e, static_cast<std::uint64_t>(t)})(), a.chains);
    baseline[k] = rescaled_mean_baseline(obs, sig, sigma(target_col));
    truth[k] = panel.returns(t, target_col);
  });

  const auto header =
      provenance(cmd, cfg.train.seed, with_config({a.checkpoint, a.panel}, a.common)).header_line();
  auto os = open_output(a.out);
  os << header << '\n' << kPredictionHeader;
  std::vector<double> mean(days.size());
  for (std::size_t k = 0; k < days.size(); ++k) {
    write_prediction_row(os, panel.dates[static_cast<std::size_t>(days[k])], truth[k], preds[k], baseline[k]);
    mean[k] = preds[k].mean;
  }
  const auto [mae_phi4, n_phi4] = finite_mae(mean, truth);
  const auto [mae_base, n_base] = finite_mae(baseline, truth);
  if (!a.summary.empty()) {
    auto ss = open_output(a.summary);
    ss << header << '\n'
       << "method,mae,days\n"
       << "phi4," << format_double(mae_phi4) << ',' << n_phi4 << '\n'
       << "rescaled_mean," << format_double(mae_base) << ',' << n_base << '\n';
  }
  out << "phi4 mae=" << format_double(mae_phi4) << " rescaled_mean mae=" << format_double(mae_base)
      << " days=" << days.size() << '\n';
  return 0;
}

struct SeriesArgs {
  Common common;
  std::string panel;
  std::string ticker;
  std::optional<Eigen::Index> test_days;
  std::optional<std::string> from;
  std::optional<std::string> to;
  std::string out;
  std::string summary;
};

void add_series(CLI::App* c, SeriesArgs& a) {
  add_common(c, a.common);
  c->add_option("--panel", a.panel, "panel CSV")->required()->check(CLI::ExistingFile);
  c->add_option("--ticker", a.ticker, "ticker to forecast; defaults to the only one");
  auto* n = c->add_option("--test-days", a.test_days, "evaluate the last N days (default 200)");
  auto* f = c->add_option("--from", a.from, "evaluate days on or after this date");
  c->add_option("--to", a.to, "with --from, last evaluation date")->needs(f);
  n->excludes(f);
  c->add_option("--out", a.out, "per-day or per-window CSV")->required();
}

Eigen::VectorXd series_of(const ReturnPanel& panel, const std::string& ticker) {
  if (ticker.empty()) {
    if (panel.size() != 1) throw InputError("--ticker is required for a multi-ticker panel");
    return panel.returns.col(0);
  }
  return panel.returns.col(panel.column(ticker));
}

int cmd_forecast(const SeriesArgs& a, Eigen::Index baseline_window, const std::string& cmd, std::ostream& out) {
  auto cfg = resolve(a.common);
  const auto panel = read_panel_csv(a.panel);
  const Eigen::VectorXd r = series_of(panel, a.ticker);
  const auto days = evaluation_days(panel, a.test_days, a.from, a.to);
  const auto result = next_day_forecast(r, days, cfg.forecast);

  std::vector<double> mean, truth, zero, lin;
  for (const auto& d : result) {
    mean.push_back(d.phi4.mean);
    truth.push_back(d.truth);
    zero.push_back(0.0);
    lin.push_back(d.index - baseline_window - cfg.lags >= 0
                      ? linreg_predict(r.head(d.index), baseline_window, cfg.lags)
                      : std::numeric_limits<double>::quiet_NaN());
  }
  const auto header = provenance(cmd, cfg.forecast.seed, with_config({a.panel}, a.common)).header_line();
  auto os = open_output(a.out);
  os << header << '\n' << kPredictionHeader;
  for (std::size_t k = 0; k < result.size(); ++k)
    write_prediction_row(os, panel.dates[static_cast<std::size_t>(result[k].index)], truth[k], result[k].phi4, lin[k]);

  const auto [mae_phi4, n_phi4] = finite_mae(mean, truth);
  const auto [mae_zero, n_zero] = finite_mae(zero, truth);
  const auto [mae_lin, n_lin] = finite_mae(lin, truth);
  if (!a.summary.empty()) {
    auto ss = open_output(a.summary);
    ss << header << '\n'
       << "method,window,mae,days\n"
       << "phi4," << cfg.forecast.window << ',' << format_double(mae_phi4) << ',' << n_phi4 << '\n'
       << "naive_zero,0," << format_double(mae_zero) << ',' << n_zero << '\n'
       << "linreg," << baseline_window << ',' << format_double(mae_lin) << ',' << n_lin << '\n';
  }
  std::size_t skipped = 0;
  for (const auto& d : result) {
    if (d.ok) continue;
    ++skipped;
    out << "skipped " << panel.dates[static_cast<std::size_t>(d.index)] << ": " << d.note << '\n';
  }
  out << "phi4 mae=" << format_double(mae_phi4) << " naive_zero mae=" << format_double(mae_zero)
      << " linreg mae=" << format_double(mae_lin) << " days=" << result.size() << " skipped=" << skipped << '\n';
  return 0;
}

int cmd_baseline(const SeriesArgs& a, const std::string& windows, const std::string& cmd, std::ostream& out) {
  const auto cfg = resolve(a.common);
  const auto panel = read_panel_csv(a.panel);
  const Eigen::VectorXd r = series_of(panel, a.ticker);
  const auto days = evaluation_days(panel, a.test_days, a.from, a.to);
  const auto results = rolling_linreg_baseline(r, parse_list<Eigen::Index>(windows, "--windows"), cfg.lags, days);
  auto os = open_output(a.out);
  os << provenance(cmd, 0, with_config({a.panel}, a.common)).header_line() << '\n'
     << "window,lags,mae,days,singular_days\n";
  for (const auto& res : results) {
    os << res.window << ',' << cfg.lags << ',' << format_double(res.mae) << ','
       << static_cast<Eigen::Index>(days.size()) - res.singular_days << ',' << res.singular_days << '\n';
    out << "window=" << res.window << " mae=" << format_double(res.mae) << '\n';
  }
  return 0;
}

int cmd_validate(const std::string& level, std::uint64_t seed, unsigned threads, std::ostream& out) {
  const auto lv = level == "full" ? ValidationLevel::full : ValidationLevel::quick;
  const auto checks = run_validation(lv, seed, resolve_threads(threads));
  int failed = 0;
  for (const auto& c : checks) {
    out << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    failed += !c.passed;
  }
  out << (failed ? "validation failed: " : "validation passed: ") << checks.size() - failed << '/'
      << checks.size() << " checks\n";
  return failed ? 1 : 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Disordered phi^4 Markov random field for return series"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);
  const std::string cmd = command_line(args);

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "close prices to an aligned log-return panel");
  c_ingest->add_option("--input", ingest.inputs, "price CSV, repeatable")->required()->check(CLI::ExistingFile);
  c_ingest->add_option("--format", ingest.format, "long or wide")->check(CLI::IsMember({"long", "wide"}));
  c_ingest->add_option("--out", ingest.out, "panel CSV")->required();
  c_ingest->add_option("--date-col", ingest.schema.date_col);
  c_ingest->add_option("--ticker-col", ingest.schema.ticker_col);
  c_ingest->add_option("--close-col", ingest.schema.close_col);
  unsigned ingest_threads = 0;
  c_ingest->add_option("--threads", ingest_threads, "accepted for uniformity; ingest is single-threaded");

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "fit couplings to a panel");
  add_common(c_train, tr.common);
  c_train->add_option("--panel", tr.panel, "panel CSV")->required()->check(CLI::ExistingFile);
  c_train->add_option("--out", tr.out, "checkpoint JSON")->required();
  c_train->add_option("--history", tr.history, "per-epoch CSV (default: the checkpoint path with extension .history.csv)");

  SampleArgs sa;
  auto* c_sample = app.add_subcommand("sample", "draw configurations from a checkpoint");
  add_common(c_sample, sa.common);
  c_sample->add_option("--checkpoint", sa.checkpoint)->required()->check(CLI::ExistingFile);
  c_sample->add_option("--out", sa.out, "samples CSV")->required();
  c_sample->add_option("--clamp", sa.clamps, "TICKER=return, repeatable");
  c_sample->add_option("--chains", sa.chains)->check(CLI::PositiveNumber);
  c_sample->add_option("--n-samples", sa.n_samples)->check(CLI::PositiveNumber);

  StatsArgs st;
  auto* c_stats = app.add_subcommand("stats", "rolling market mean and kurtosis");
  add_common(c_stats, st.common);
  c_stats->add_option("--panel", st.panel)->required()->check(CLI::ExistingFile);
  c_stats->add_option("--checkpoint", st.checkpoint, "model for the phi4 series; trained inline if absent")
      ->check(CLI::ExistingFile);
  c_stats->add_option("--out", st.out)->required();
  c_stats->add_flag("--binarize", st.binarize, "also emit the binarized series");
  c_stats->add_flag("--no-model", st.skip_model, "omit the phi4 series");
  c_stats->add_option("--window", st.window)->check(CLI::Range(4, 1 << 30));
  c_stats->add_option("--kurtosis", st.kurtosis)->check(CLI::IsMember({"market", "pooled"}));

  ScalingArgs sc;
  auto* c_scaling = app.add_subcommand("scaling", "mean couplings against volume");
  add_common(c_scaling, sc.common);
  c_scaling->add_option("--panel", sc.panel)->required()->check(CLI::ExistingFile);
  c_scaling->add_option("--volumes", sc.volumes, "comma-separated, increasing")->required();
  c_scaling->add_option("--subset", sc.subset)->check(CLI::IsMember({"alphabetical", "random"}));
  c_scaling->add_option("--draws", sc.draws)->check(CLI::PositiveNumber);
  c_scaling->add_option("--out", sc.out, "V,mean_w,mean_a CSV")->required();
  c_scaling->add_option("--summary", sc.summary, "fit summary CSV");

  ImputeArgs im;
  auto* c_impute = app.add_subcommand("impute", "predict one stock from the others on each day");
  add_common(c_impute, im.common);
  c_impute->add_option("--checkpoint", im.checkpoint)->required()->check(CLI::ExistingFile);
  c_impute->add_option("--panel", im.panel)->required()->check(CLI::ExistingFile);
  c_impute->add_option("--target", im.target)->required();
  c_impute->add_option("--eval-from", im.eval_from, "first evaluated date; earlier days give the sigmas");
  c_impute->add_option("--eval-to", im.eval_to, "last evaluated date");
  c_impute->add_option("--chains", im.chains)->check(CLI::PositiveNumber);
  c_impute->add_option("--out", im.out, "per-day CSV")->required();
  c_impute->add_option("--summary", im.summary, "MAE summary CSV");

  SeriesArgs fc;
  Eigen::Index baseline_window = 200;
  auto* c_forecast = app.add_subcommand("forecast", "walk-forward next-day forecasts");
  add_series(c_forecast, fc);
  c_forecast->add_option("--baseline-window", baseline_window, "linreg window for baseline_value")
      ->check(CLI::PositiveNumber);
  c_forecast->add_option("--summary", fc.summary, "MAE summary CSV");

  SeriesArgs bl;
  std::string windows = "25,50,100,200,300,400";
  auto* c_baseline = app.add_subcommand("baseline", "rolling linear regression MAE per window");
  add_series(c_baseline, bl);
  c_baseline->add_option("--windows", windows, "comma-separated window sizes");

  std::string level = "quick";
  std::uint64_t vseed = 1;
  unsigned vthreads = 0;
  auto* c_validate = app.add_subcommand("validate", "oracle self-checks");
  c_validate->add_option("--level", level)->check(CLI::IsMember({"quick", "full"}));
  c_validate->add_option("--seed", vseed);
  c_validate->add_option("--threads", vthreads);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion& e) {
    out << kToolVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (c_ingest->parsed()) return cmd_ingest(ingest, cmd, out);
    if (c_train->parsed()) return cmd_train(tr, cmd, out);
    if (c_sample->parsed()) return cmd_sample(sa, cmd, out);
    if (c_stats->parsed()) return cmd_stats(st, cmd, out);
    if (c_scaling->parsed()) return cmd_scaling(sc, cmd, out, err);
    if (c_impute->parsed()) return cmd_impute(im, cmd, out);
    if (c_forecast->parsed()) return cmd_forecast(fc, baseline_window, cmd, out);
    if (c_baseline->parsed()) return cmd_baseline(bl, windows, cmd, out);
    if (c_validate->parsed()) return cmd_validate(level, vseed, vthreads, out);
  } catch (const DivergenceError& e) {
    err << "training diverged at epoch " << e.epoch() << ": " << e.what() << '\n';
    return 3;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace phi4::cli
