#include "config.hpp"

#include <functional>
#include <sstream>

#include "phi4/errors.hpp"
#include "phi4/io.hpp"

namespace phi4::cli {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string unquote(std::string v) {
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front())
    return v.substr(1, v.size() - 2);
  return v;
}

double as_double(const std::string& key, const std::string& v) { return parse_double(v, key); }

long long as_int(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long long x = 0;
  try {
    x = std::stoll(v, &used);
  } catch (const std::exception&) {
    throw InputError(key + ": not an integer: '" + v + "'");
  }
  if (used != v.size()) throw InputError(key + ": not an integer: '" + v + "'");
  return x;
}

bool as_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw InputError(key + ": expected true or false, got '" + v + "'");
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

void add_sampler_keys(std::map<std::string, Setter>& s, const std::string& prefix,
                      std::function<SamplerConfig&(RunConfig&)> get) {
  s[prefix + "proposal_width"] = [get](RunConfig& c, auto& k, auto& v) { get(c).proposal_width = as_double(k, v); };
  s[prefix + "sweeps_burn_in"] = [get](RunConfig& c, auto& k, auto& v) { get(c).sweeps_burn_in = static_cast<int>(as_int(k, v)); };
  s[prefix + "sweeps_between_samples"] = [get](RunConfig& c, auto& k, auto& v) {
    get(c).sweeps_between_samples = static_cast<int>(as_int(k, v));
  };
  s[prefix + "n_samples"] = [get](RunConfig& c, auto& k, auto& v) { get(c).n_samples = static_cast<int>(as_int(k, v)); };
  s[prefix + "adapt_acceptance"] = [get](RunConfig& c, auto& k, auto& v) {
    if (v == "off" || v == "none" || v == "false")
      get(c).adapt_acceptance.reset();
    else
      get(c).adapt_acceptance = as_double(k, v);
  };
}

void add_train_keys(std::map<std::string, Setter>& s, const std::string& prefix,
                    std::function<TrainConfig&(RunConfig&)> get) {
  s[prefix + "learning_rate"] = [get](RunConfig& c, auto& k, auto& v) { get(c).learning_rate = as_double(k, v); };
  s[prefix + "lambda_rate_scale"] = [get](RunConfig& c, auto& k, auto& v) { get(c).lambda_rate_scale = as_double(k, v); };
  s[prefix + "epochs"] = [get](RunConfig& c, auto& k, auto& v) { get(c).epochs = static_cast<int>(as_int(k, v)); };
  s[prefix + "chains"] = [get](RunConfig& c, auto& k, auto& v) { get(c).chains = static_cast<int>(as_int(k, v)); };
  s[prefix + "persistent"] = [get](RunConfig& c, auto& k, auto& v) { get(c).persistent = as_bool(k, v); };
  s[prefix + "l2_weight_decay"] = [get](RunConfig& c, auto& k, auto& v) { get(c).l2_weight_decay = as_double(k, v); };
  s[prefix + "averaging_fraction"] = [get](RunConfig& c, auto& k, auto& v) { get(c).averaging_fraction = as_double(k, v); };
  s[prefix + "moment_source"] = [get](RunConfig& c, auto& k, auto& v) {
    if (v == "mcmc")
      get(c).moment_source = MomentSource::mcmc;
    else if (v == "quadrature")
      get(c).moment_source = MomentSource::quadrature;
    else
      throw InputError(k + ": expected mcmc or quadrature");
  };
  s[prefix + "init.w_init_std"] = [get](RunConfig& c, auto& k, auto& v) { get(c).init.w_init_std = as_double(k, v); };
  s[prefix + "init.a_init"] = [get](RunConfig& c, auto& k, auto& v) { get(c).init.a_init = as_double(k, v); };
  s[prefix + "init.mu_init"] = [get](RunConfig& c, auto& k, auto& v) { get(c).init.mu_init = as_double(k, v); };
  s[prefix + "init.lambda_init"] = [get](RunConfig& c, auto& k, auto& v) { get(c).init.lambda_init = as_double(k, v); };
  add_sampler_keys(s, prefix + "sampler.", [get](RunConfig& c) -> SamplerConfig& { return get(c).sampler; });
}

const std::map<std::string, Setter>& setters() {
  static const auto table = [] {
    std::map<std::string, Setter> s;
    add_train_keys(s, "", [](RunConfig& c) -> TrainConfig& { return c.train; });
    s["seed"] = [](RunConfig& c, auto& k, auto& v) { c.train.seed = static_cast<std::uint64_t>(as_int(k, v)); };
    s["standardize"] = [](RunConfig& c, auto& k, auto& v) { c.standardize = as_bool(k, v); };
    add_sampler_keys(s, "sampling.", [](RunConfig& c) -> SamplerConfig& { return c.sampling; });
    add_train_keys(s, "forecast.train.", [](RunConfig& c) -> TrainConfig& { return c.forecast.train; });
    add_sampler_keys(s, "forecast.sampler.", [](RunConfig& c) -> SamplerConfig& { return c.forecast.sampler; });
    s["forecast.window"] = [](RunConfig& c, auto& k, auto& v) { c.forecast.window = as_int(k, v); };
    s["forecast.train_window"] = [](RunConfig& c, auto& k, auto& v) { c.forecast.train_window = as_int(k, v); };
    s["forecast.stride"] = [](RunConfig& c, auto& k, auto& v) { c.forecast.stride = as_int(k, v); };
    s["forecast.retrain_every"] = [](RunConfig& c, auto& k, auto& v) { c.forecast.retrain_every = as_int(k, v); };
    s["forecast.standardize"] = [](RunConfig& c, auto& k, auto& v) { c.forecast.standardize = as_bool(k, v); };
    s["forecast.sampling_chains"] = [](RunConfig& c, auto& k, auto& v) {
      c.forecast.sampling_chains = static_cast<int>(as_int(k, v));
    };
    s["baseline.lags"] = [](RunConfig& c, auto& k, auto& v) { c.lags = as_int(k, v); };
    return s;
  }();
  return table;
}

}  // namespace

RunConfig default_run_config() { return RunConfig{}; }

std::map<std::string, std::string> parse_key_values(const std::string& text, const std::string& source) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    line = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (line.empty()) continue;
    const auto ctx = source + ":" + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']') throw InputError(ctx + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InputError(ctx + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = unquote(trim(line.substr(eq + 1)));
    if (key.empty()) throw InputError(ctx + ": empty key");
    out[section.empty() ? key : section + "." + key] = value;
  }
  return out;
}

void apply_config(RunConfig& cfg, const std::map<std::string, std::string>& values) {
  const auto& table = setters();
  for (const auto& [key, value] : values) {
    const auto it = table.find(key);
    if (it == table.end()) throw InputError("unknown config key '" + key + "'");
    it->second(cfg, key, value);
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  RunConfig cfg = default_run_config();
  apply_config(cfg, parse_key_values(read_file(path), path.string()));
  return cfg;
}

}  // namespace phi4::cli
