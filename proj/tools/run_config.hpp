#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "act/backtest/backtest.hpp"
#include "act/data/synthetic.hpp"
#include "act/model/config.hpp"
#include "act/train/trainer.hpp"

namespace act::cli {

// Flat key=value settings. Precedence: flags > config file > defaults.
using Settings = std::map<std::string, std::string>;

// Throws ConfigError unless some command reads `key`.
void check_known(const std::string& key, const std::string& where);

// Reads the --config file (if any). Throws ConfigError on keys no command knows.
Settings load_settings(const std::filesystem::path& path);

SyntheticConfig synth_config(const Settings& s, std::uint64_t seed);
ActConfig act_config(const Settings& s);
TrainOptions train_options(const Settings& s, std::uint64_t seed);
StrategyConfig strategy_config(const Settings& s);
std::size_t regress_lags(const Settings& s);
bool regress_dof(const Settings& s);

// Fully resolved settings for the manifest, defaults included.
Settings resolved_synth(const SyntheticConfig& c);
Settings resolved_train(const ActConfig& cfg, const TrainOptions& opt);
Settings resolved_strategy(const StrategyConfig& c);

}  // namespace act::cli
