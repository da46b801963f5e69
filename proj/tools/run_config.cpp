#include "run_config.hpp"

#include <set>

#include "act/data/csv.hpp"
#include "act/error.hpp"

namespace act::cli {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      // synth
      "num_instruments", "num_features", "days", "tau_signal", "noise", "industry_size", "num_regions", "lookback",
      "trend_weight", "signal_weight", "idio_scale",
      // model
      "F", "T", "d", "tau", "sigma", "w_s", "k", "dropout_rate", "lambda", "leaky_slope", "tcn_kernel", "ln_epsilon",
      "pspe", "fci", "sci",
      // optimiser and split
      "lr", "beta1", "beta2", "adam_epsilon", "epochs", "batch", "patience", "valid_start", "test_start",
      "train_fraction", "valid_fraction",
      // backtest and regression
      "topk", "n_drop", "cost_bps", "lags", "dof_correction"};
  return keys;
}

template <class T, class Fn>
void read(const Settings& s, const char* key, T& field, Fn parse) {
  const auto it = s.find(key);
  if (it != s.end()) field = parse(it->first, it->second);
}

}  // namespace

void check_known(const std::string& key, const std::string& where) {
  if (known_keys().count(key) == 0) throw ConfigError(where + ": unknown key '" + key + "'");
}

Settings load_settings(const std::filesystem::path& path) {
  if (path.empty()) return {};
  Settings s = parse_key_value_text(csv::read_text(path), path.string());
  for (const auto& [k, v] : s) check_known(k, path.string());
  return s;
}

SyntheticConfig synth_config(const Settings& s, std::uint64_t seed) {
  SyntheticConfig c;
  c.seed = seed;
  read(s, "num_instruments", c.num_instruments, parse_size);
  read(s, "num_features", c.num_features, parse_size);
  read(s, "days", c.days, parse_size);
  read(s, "tau_signal", c.tau_signal, parse_size);
  read(s, "noise", c.noise, parse_real);
  read(s, "industry_size", c.industry_size, parse_size);
  read(s, "num_regions", c.num_regions, parse_size);
  read(s, "lookback", c.lookback, parse_size);
  read(s, "trend_weight", c.trend_weight, parse_real);
  read(s, "signal_weight", c.signal_weight, parse_real);
  read(s, "idio_scale", c.idio_scale, parse_real);
  return c;
}

ActConfig act_config(const Settings& s) {
  ActConfig cfg;
  std::map<std::string, std::string> kv;
  for (const auto& key : {"F", "T", "d", "tau", "sigma", "w_s", "k", "dropout_rate", "lambda", "leaky_slope",
                          "tcn_kernel", "ln_epsilon", "pspe", "fci", "sci"}) {
    if (const auto it = s.find(key); it != s.end()) kv.insert(*it);
  }
  apply_key_values(cfg, kv);
  return cfg;
}

TrainOptions train_options(const Settings& s, std::uint64_t seed) {
  TrainOptions o;
  o.seed = seed;
  read(s, "lr", o.adam.lr, parse_real);
  read(s, "beta1", o.adam.beta1, parse_real);
  read(s, "beta2", o.adam.beta2, parse_real);
  read(s, "adam_epsilon", o.adam.epsilon, parse_real);
  read(s, "epochs", o.epochs, parse_size);
  read(s, "batch", o.batch, parse_size);
  read(s, "patience", o.patience, parse_size);
  read(s, "train_fraction", o.train_fraction, parse_real);
  read(s, "valid_fraction", o.valid_fraction, parse_real);
  if (const auto it = s.find("valid_start"); it != s.end()) o.valid_start = it->second;
  if (const auto it = s.find("test_start"); it != s.end()) o.test_start = it->second;
  return o;
}

StrategyConfig strategy_config(const Settings& s) {
  StrategyConfig c;
  read(s, "topk", c.k, parse_size);
  read(s, "n_drop", c.n_drop, parse_size);
  read(s, "cost_bps", c.cost_bps, parse_real);
  c.validate();
  return c;
}

std::size_t regress_lags(const Settings& s) {
  std::size_t lags = 5;
  read(s, "lags", lags, parse_size);
  return lags;
}

bool regress_dof(const Settings& s) {
  bool dof = false;
  read(s, "dof_correction", dof, parse_bool);
  return dof;
}

Settings resolved_synth(const SyntheticConfig& c) {
  return {{"num_instruments", std::to_string(c.num_instruments)},
          {"num_features", std::to_string(c.num_features)},
          {"days", std::to_string(c.days)},
          {"tau_signal", std::to_string(c.tau_signal)},
          {"noise", csv::format_double(c.noise)},
          {"industry_size", std::to_string(c.industry_size)},
          {"num_regions", std::to_string(c.num_regions)},
          {"lookback", std::to_string(c.lookback)},
          {"trend_weight", csv::format_double(c.trend_weight)},
          {"signal_weight", csv::format_double(c.signal_weight)},
          {"idio_scale", csv::format_double(c.idio_scale)}};
}

Settings resolved_train(const ActConfig& cfg, const TrainOptions& o) {
  Settings s = to_key_values(cfg);
  s["lr"] = csv::format_double(o.adam.lr);
  s["beta1"] = csv::format_double(o.adam.beta1);
  s["beta2"] = csv::format_double(o.adam.beta2);
  s["adam_epsilon"] = csv::format_double(o.adam.epsilon);
  s["epochs"] = std::to_string(o.epochs);
  s["batch"] = std::to_string(o.batch);
  s["patience"] = std::to_string(o.patience);
  s["train_fraction"] = csv::format_double(o.train_fraction);
  s["valid_fraction"] = csv::format_double(o.valid_fraction);
  s["valid_start"] = o.valid_start;
  s["test_start"] = o.test_start;
  return s;
}

Settings resolved_strategy(const StrategyConfig& c) {
  return {{"topk", std::to_string(c.k)}, {"n_drop", std::to_string(c.n_drop)}, {"cost_bps", csv::format_double(c.cost_bps)}};
}

}  // namespace act::cli
