#include "commands.hpp"

#include <chrono>
#include <iostream>

#include "act/backtest/chart.hpp"
#include "act/data/csv.hpp"
#include "act/data/panel.hpp"
#include "act/data/predictions.hpp"
#include "act/error.hpp"
#include "act/eval/metrics.hpp"
#include "act/factor/regression.hpp"
#include "act/model/checkpoint.hpp"
#include "manifest.hpp"

namespace act::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Settings merged(const GlobalOptions& g) {
  Settings s = load_settings(g.config);
  for (const auto& [k, v] : g.overrides) {
    check_known(k, "--set");
    s[k] = v;
  }
  return s;
}

void require(const std::filesystem::path& p, const char* what) {
  if (p.empty()) throw ConfigError(std::string("missing --") + what);
  if (!std::filesystem::exists(p)) throw DataError(std::string(what) + " file not found: " + p.string());
}

struct LoadedPanel {
  PanelDataset raw;
  PanelDataset ds;  // preprocessed
  RelationGraphs graphs;
};

LoadedPanel load_inputs(const PanelInputs& in, Manifest& m, bool need_graphs) {
  require(in.features, "features");
  require(in.prices, "prices");
  m.add_input("features", in.features);
  m.add_input("prices", in.prices);
  LoadedPanel out;
  out.raw = load_panel(in.features, in.prices);
  out.ds = preprocess_features(out.raw);
  if (need_graphs) {
    require(in.industry, "industry");
    require(in.region, "region");
    m.add_input("industry", in.industry);
    m.add_input("region", in.region);
    out.graphs.instruments = out.ds.instruments;
    out.graphs.industry = load_relation_graph(in.industry, out.ds.instruments);
    out.graphs.region = load_relation_graph(in.region, out.ds.instruments);
  }
  if (out.raw.price_is_close) m.add_note("labels", "close prices stand in for VWAP on some cells");
  return out;
}

// Reads a numeric column back from a CSV this tool wrote.
std::vector<double> column_values(const csv::Table& t, const char* name) {
  const std::size_t c = t.column(name);
  std::vector<double> out;
  for (const auto& row : t.rows) {
    out.push_back(row[c] == "nan" ? std::numeric_limits<double>::quiet_NaN() : csv::parse_double(row[c], t.source));
  }
  return out;
}

std::vector<std::string> column_text(const csv::Table& t, const char* name) {
  const std::size_t c = t.column(name);
  std::vector<std::string> out;
  for (const auto& row : t.rows) out.push_back(row[c]);
  return out;
}

}  // namespace

void cmd_synth(const GlobalOptions& g) {
  const auto t0 = Clock::now();
  const Settings s = merged(g);
  const SyntheticConfig cfg = synth_config(s, g.seed);
  Manifest m("synth", g.seed, g.out);
  m.set_config(resolved_synth(cfg));
  if (!g.config.empty()) m.add_input("config", g.config);
  const SyntheticMarket market = generate_synthetic(cfg);
  m.write_artifact("features.csv", format_features_csv(market.dataset));
  m.write_artifact("prices.csv",
                   format_prices_csv(market.dataset.dates, market.dataset.instruments, market.prices));
  m.write_artifact("industry.csv", format_membership_csv(market.industry));
  m.write_artifact("region.csv", format_membership_csv(market.region));
  m.write_artifact("factors.csv", format_factors_csv(market.factors));
  m.finish(seconds_since(t0));
}

void cmd_train(const GlobalOptions& g, const PanelInputs& in) {
  const auto t0 = Clock::now();
  Settings s = merged(g);
  Manifest m("train", g.seed, g.out);
  if (!g.config.empty()) m.add_input("config", g.config);
  const LoadedPanel p = load_inputs(in, m, true);
  if (s.find("F") == s.end()) s["F"] = std::to_string(p.ds.num_features);
  const ActConfig cfg = act_config(s);
  TrainOptions opt = train_options(s, g.seed);
  opt.log = &std::cerr;
  m.set_config(resolved_train(cfg, opt));
  const TrainResult r = train(p.ds, p.graphs, cfg, opt);
  m.add_note("selected_epoch", std::to_string(r.history.selected_epoch));
  m.add_note("valid_start", p.ds.dates[r.split.valid_start]);
  m.add_note("test_start", r.split.test_start < p.ds.num_dates() ? p.ds.dates[r.split.test_start] : "");
  m.add_note("skipped_ic_samples", std::to_string(r.history.skipped_ic_samples));
  m.add_note("parameter_count", std::to_string(parameter_count(cfg)));
  m.write_artifact("model.ckpt", format_checkpoint(cfg, r.params));
  m.write_artifact("history.csv", format_history_csv(r.history));
  m.finish(seconds_since(t0));
}

void cmd_predict(const GlobalOptions& g, const PanelInputs& in, const std::filesystem::path& model,
                 const std::string& start, const std::string& end) {
  const auto t0 = Clock::now();
  const Settings s = merged(g);
  Manifest m("predict", g.seed, g.out);
  require(model, "model");
  m.add_input("model", model);
  if (!g.config.empty()) m.add_input("config", g.config);
  const LoadedPanel p = load_inputs(in, m, true);
  const Checkpoint ck = load_checkpoint(model);
  Settings resolved = to_key_values(ck.config);

  std::size_t first = 0;
  std::size_t last = p.ds.num_dates();
  auto position = [&](const std::string& date) {
    return static_cast<std::size_t>(std::lower_bound(p.ds.dates.begin(), p.ds.dates.end(), date) - p.ds.dates.begin());
  };
  if (!start.empty()) {
    first = position(start);
  } else {
    first = resolve_split(p.ds, train_options(s, g.seed)).test_start;
  }
  if (!end.empty()) last = std::upper_bound(p.ds.dates.begin(), p.ds.dates.end(), end) - p.ds.dates.begin();
  resolved["start"] = first < p.ds.num_dates() ? p.ds.dates[first] : "";
  resolved["end"] = last > 0 ? p.ds.dates[last - 1] : "";
  m.set_config(resolved);
  const PredictionSeries preds = predict_sliding(ck.params, p.ds, p.graphs, ck.config, first, last);
  m.write_artifact("predictions.csv", format_predictions_csv(preds));
  m.finish(seconds_since(t0));
}

void cmd_evaluate(const GlobalOptions& g, const PanelInputs& in, const std::filesystem::path& preds_path,
                  const std::string& group_by, const std::filesystem::path& membership) {
  const auto t0 = Clock::now();
  Manifest m("evaluate", g.seed, g.out);
  require(preds_path, "preds");
  m.add_input("predictions", preds_path);
  const LoadedPanel p = load_inputs(in, m, false);
  const PredictionSeries preds = load_predictions(preds_path);
  Settings resolved{{"group_by", group_by}};
  m.set_config(resolved);

  const MetricReport report = summarize(preds, p.raw);
  m.write_artifact("metrics.csv", format_metric_csv(report));
  const std::string daily = format_daily_csv(report);
  m.write_artifact("daily.csv", daily);
  const csv::Table t = csv::parse(daily, "daily.csv");
  m.write_artifact("daily_ic.svg",
                   render_line_chart_svg("Daily IC", "correlation", column_text(t, "datetime"),
                                         {{"IC", column_values(t, "ic")}, {"RankIC", column_values(t, "rank_ic")}}));
  if (!group_by.empty()) {
    if (group_by != "industry" && group_by != "region") throw ConfigError("--group-by must be industry or region");
    const std::filesystem::path file = !membership.empty() ? membership
                                       : group_by == "industry" ? in.industry
                                                                : in.region;
    require(file, group_by == "industry" ? "industry" : "region");
    m.add_input(group_by, file);
    const auto groups = subgroup_metrics(preds, p.raw, load_membership(file));
    m.write_artifact("subgroups_" + group_by + ".csv", format_subgroup_csv(groups));
  }
  m.finish(seconds_since(t0));
}

void cmd_backtest(const GlobalOptions& g, const PanelInputs& in, const std::vector<std::filesystem::path>& preds,
                  const std::vector<std::string>& labels) {
  const auto t0 = Clock::now();
  const Settings s = merged(g);
  const StrategyConfig strategy = strategy_config(s);
  Manifest m("backtest", g.seed, g.out);
  m.set_config(resolved_strategy(strategy));
  if (!g.config.empty()) m.add_input("config", g.config);
  if (preds.empty()) throw ConfigError("missing --preds");
  if (!labels.empty() && labels.size() != preds.size()) throw ConfigError("--label must be given once per --preds");
  const LoadedPanel p = load_inputs(in, m, false);
  const std::vector<double> realized = realized_returns(p.raw);
  const std::vector<double> bench = equal_weight_benchmark(realized, p.raw.num_dates(), p.raw.num_instruments());

  std::vector<std::string> chart_dates;
  std::vector<ChartSeries> series;
  for (std::size_t r = 0; r < preds.size(); ++r) {
    require(preds[r], "preds");
    const std::string label = labels.empty() ? preds[r].stem().string() : labels[r];
    const std::string suffix = preds.size() == 1 ? "" : "_" + label;
    m.add_input("predictions" + suffix, preds[r]);
    const BacktestResult bt =
        run_backtest(load_predictions(preds[r]), p.raw.dates, p.raw.instruments, realized, bench, strategy);
    if (bt.frozen_positions > 0) m.add_note("frozen_positions" + suffix, std::to_string(bt.frozen_positions));
    if (bt.short_days > 0) m.add_note("short_universe_days" + suffix, std::to_string(bt.short_days));
    const std::string table = format_backtest_csv(bt);
    m.write_artifact("backtest" + suffix + ".csv", table);
    m.write_artifact("holdings" + suffix + ".csv", format_holdings_csv(bt));
    m.write_artifact("portfolio_metrics" + suffix + ".csv",
                     format_portfolio_metrics_csv(portfolio_metrics(bt.excess, bt.portfolio)));

    const csv::Table t = csv::parse(table, "backtest" + suffix + ".csv");
    const auto dates = column_text(t, "datetime");
    if (r == 0) chart_dates = dates;
    if (dates != chart_dates) throw DataError("backtest runs cover different dates; chart needs one calendar");
    series.push_back({label, column_values(t, "cum_excess")});
  }
  m.write_artifact("cumulative_excess.svg",
                   render_line_chart_svg("Cumulative excess return", "cum. excess", chart_dates, series));
  m.finish(seconds_since(t0));
}

void cmd_regress(const GlobalOptions& g, const std::filesystem::path& backtest_csv,
                 const std::filesystem::path& factors_path) {
  const auto t0 = Clock::now();
  const Settings s = merged(g);
  const std::size_t lags = regress_lags(s);
  const bool dof = regress_dof(s);
  Manifest m("regress", g.seed, g.out);
  m.set_config({{"lags", std::to_string(lags)}, {"dof_correction", dof ? "true" : "false"}});
  require(backtest_csv, "backtest");
  require(factors_path, "factors");
  m.add_input("backtest", backtest_csv);
  m.add_input("factors", factors_path);
  const csv::Table t = csv::read(backtest_csv);
  const FactorSeries factors = load_factors(factors_path);
  const auto dates = column_text(t, "datetime");
  const auto returns = column_values(t, "portfolio_ret");
  const std::vector<RegressionResult> results = {
      ff_regression(dates, returns, factors, FactorModel::ff3, lags, dof),
      ff_regression(dates, returns, factors, FactorModel::ff5, lags, dof)};
  m.write_artifact("regression.csv", format_regression_csv(results));
  m.write_artifact("regression_detail.csv", format_regression_detail_csv(results));
  m.finish(seconds_since(t0));
}

}  // namespace act::cli
