#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "run_config.hpp"

namespace act::cli {

struct GlobalOptions {
  std::uint64_t seed = 0;
  std::filesystem::path config;
  std::filesystem::path out;
  Settings overrides;  // from flags; beat the config file
};

struct PanelInputs {
  std::filesystem::path features;
  std::filesystem::path prices;
  std::filesystem::path industry;
  std::filesystem::path region;
};

void cmd_synth(const GlobalOptions& g);
void cmd_train(const GlobalOptions& g, const PanelInputs& in);
void cmd_predict(const GlobalOptions& g, const PanelInputs& in, const std::filesystem::path& model,
                 const std::string& start, const std::string& end);
void cmd_evaluate(const GlobalOptions& g, const PanelInputs& in, const std::filesystem::path& preds,
                  const std::string& group_by, const std::filesystem::path& membership);
void cmd_backtest(const GlobalOptions& g, const PanelInputs& in, const std::vector<std::filesystem::path>& preds,
                  const std::vector<std::string>& labels);
void cmd_regress(const GlobalOptions& g, const std::filesystem::path& backtest_csv,
                 const std::filesystem::path& factors);

}  // namespace act::cli
