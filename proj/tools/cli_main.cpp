// act: synth | train | predict | evaluate | backtest | regress
//
// Exit codes: 0 ok, 2 configuration, 3 data, 4 numeric, 1 anything else.

#include <CLI11.hpp>
#include <iostream>

#include "act/error.hpp"
#include "act/model/config.hpp"
#include "commands.hpp"

namespace {

struct FlagTable {
  std::map<std::string, std::string> values;
  std::vector<std::pair<CLI::Option*, std::string>> options;

  void bind(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    options.emplace_back(app->add_option(flag, values[key], help), key);
  }
  void collect(act::cli::Settings& into) const {
    for (const auto& [opt, key] : options) {
      if (opt->count() > 0) into[key] = values.at(key);
    }
  }
};

void add_panel_inputs(CLI::App* app, act::cli::PanelInputs& in, bool graphs) {
  app->add_option("--features", in.features, "features CSV");
  app->add_option("--prices", in.prices, "prices CSV");
  if (graphs) {
    app->add_option("--industry", in.industry, "industry membership CSV");
    app->add_option("--region", in.region, "region membership CSV");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ACT cross-sectional ranking: data, training, evaluation, backtest, regression"};
  app.require_subcommand(1);
  app.fallthrough();

  act::cli::GlobalOptions g;
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--config", g.config, "key=value settings file");
  app.add_option("--out", g.out, "output directory")->required();
  std::vector<std::string> sets;
  app.add_option("--set", sets, "key=value override (repeatable)");

  FlagTable flags;
  act::cli::PanelInputs in;

  auto* synth = app.add_subcommand("synth", "write a seeded synthetic market");
  flags.bind(synth, "--n", "num_instruments", "instruments");
  flags.bind(synth, "--f", "num_features", "features");
  flags.bind(synth, "--days", "days", "trading days");
  flags.bind(synth, "--noise", "noise", "label noise scale");
  flags.bind(synth, "--industry-size", "industry_size", "instruments per industry");

  auto* train = app.add_subcommand("train", "fit the model and keep the best validation epoch");
  add_panel_inputs(train, in, true);
  std::string ablation;
  train->add_option("--ablation", ablation, "none|wo_pspe|wo_fci|wo_sci");
  flags.bind(train, "--epochs", "epochs", "maximum epochs");
  flags.bind(train, "--patience", "patience", "early-stopping patience");
  flags.bind(train, "--batch", "batch", "windows per step");
  flags.bind(train, "--lr", "lr", "learning rate");
  flags.bind(train, "--d", "d", "hidden width");
  flags.bind(train, "--T", "T", "window length");
  flags.bind(train, "--k", "k", "dynamic neighbours");
  flags.bind(train, "--valid-start", "valid_start", "first validation date");
  flags.bind(train, "--test-start", "test_start", "first test date");

  auto* predict = app.add_subcommand("predict", "score every test date with a sliding window");
  add_panel_inputs(predict, in, true);
  std::filesystem::path model;
  std::string start, end;
  predict->add_option("--model", model, "checkpoint from train");
  predict->add_option("--start", start, "first scored date (default: test split)");
  predict->add_option("--end", end, "last scored date");
  flags.bind(predict, "--test-start", "test_start", "first test date");

  auto* evaluate = app.add_subcommand("evaluate", "IC / RankIC report");
  add_panel_inputs(evaluate, in, true);
  std::filesystem::path preds_file, membership;
  std::string group_by;
  evaluate->add_option("--preds", preds_file, "predictions CSV");
  evaluate->add_option("--group-by", group_by, "industry|region");
  evaluate->add_option("--membership", membership, "membership CSV for --group-by");

  auto* backtest = app.add_subcommand("backtest", "TopKDropout simulation");
  add_panel_inputs(backtest, in, false);
  std::vector<std::filesystem::path> preds_list;
  std::vector<std::string> labels;
  backtest->add_option("--preds", preds_list, "predictions CSV (repeatable)");
  backtest->add_option("--label", labels, "chart label per --preds");
  flags.bind(backtest, "--k", "topk", "holdings");
  flags.bind(backtest, "--n-drop", "n_drop", "names replaced per rebalance");
  flags.bind(backtest, "--cost-bps", "cost_bps", "cost per unit turnover, bps");

  auto* regress = app.add_subcommand("regress", "Fama-French alpha with Newey-West errors");
  std::filesystem::path backtest_csv, factors;
  regress->add_option("--backtest", backtest_csv, "backtest CSV");
  regress->add_option("--factors", factors, "factors CSV");
  flags.bind(regress, "--lags", "lags", "Newey-West lags");
  flags.bind(regress, "--dof-correction", "dof_correction", "true|false");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw act::ConfigError("--set expects key=value, got '" + kv + "'");
      g.overrides[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    flags.collect(g.overrides);
    if (!ablation.empty()) {
      const act::Ablation a = act::ablation_preset(ablation);
      g.overrides["pspe"] = std::string(act::to_string(a.pspe));
      g.overrides["fci"] = std::string(act::to_string(a.fci));
      g.overrides["sci"] = std::string(act::to_string(a.sci));
    }
    if (synth->parsed()) act::cli::cmd_synth(g);
    if (train->parsed()) act::cli::cmd_train(g, in);
    if (predict->parsed()) act::cli::cmd_predict(g, in, model, start, end);
    if (evaluate->parsed()) act::cli::cmd_evaluate(g, in, preds_file, group_by, membership);
    if (backtest->parsed()) act::cli::cmd_backtest(g, in, preds_list, labels);
    if (regress->parsed()) act::cli::cmd_regress(g, backtest_csv, factors);
  } catch (const act::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const act::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const act::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
