#include "act/backtest/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>

#include "act/data/csv.hpp"
#include "act/error.hpp"

namespace act {

void StrategyConfig::validate() const {
  if (k < 1) throw ConfigError("strategy: k must be >= 1");
  if (n_drop < 1 || n_drop > k) throw ConfigError("strategy: n_drop must be in [1, k]");
  if (!(cost_bps >= 0.0)) throw ConfigError("strategy: cost_bps must be >= 0");
}

RebalanceResult topk_dropout_rebalance(const std::vector<double>& scores, const std::vector<std::size_t>& holdings,
                                       const StrategyConfig& cfg) {
  cfg.validate();
  const std::size_t n = scores.size();
  // Better first: scored before unscored, higher score, lower index.
  auto better = [&](std::size_t a, std::size_t b) {
    const bool sa = !std::isnan(scores[a]);
    const bool sb = !std::isnan(scores[b]);
    if (sa != sb) return sa;
    if (sa && scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  };

  std::vector<std::size_t> held = holdings;
  for (std::size_t h : held) {
    if (h >= n) throw DataError("holding index out of range");
  }
  std::sort(held.begin(), held.end(), better);
  const std::size_t n_sell = std::min(held.size(), held.size() + cfg.n_drop > cfg.k ? held.size() + cfg.n_drop - cfg.k : 0);
  std::vector<std::size_t> kept(held.begin(), held.end() - static_cast<std::ptrdiff_t>(n_sell));

  std::vector<bool> is_kept(n, false);
  for (std::size_t h : kept) is_kept[h] = true;
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_kept[i] && !std::isnan(scores[i])) pool.push_back(i);
  }
  std::sort(pool.begin(), pool.end(), better);
  for (std::size_t p = 0; p < pool.size() && kept.size() < cfg.k; ++p) kept.push_back(pool[p]);

  RebalanceResult out;
  out.short_universe = kept.size() < cfg.k;
  std::sort(kept.begin(), kept.end());
  std::vector<std::size_t> before = holdings;
  std::sort(before.begin(), before.end());
  std::set_difference(kept.begin(), kept.end(), before.begin(), before.end(), std::back_inserter(out.bought));
  std::set_difference(before.begin(), before.end(), kept.begin(), kept.end(), std::back_inserter(out.sold));
  out.holdings = std::move(kept);
  return out;
}

std::vector<double> equal_weight_benchmark(const std::vector<double>& realized, std::size_t num_dates,
                                           std::size_t num_instruments) {
  if (realized.size() != num_dates * num_instruments) throw ShapeError("benchmark: realized size mismatch");
  std::vector<double> out(num_dates, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t t = 0; t < num_dates; ++t) {
    double s = 0.0;
    std::size_t c = 0;
    for (std::size_t i = 0; i < num_instruments; ++i) {
      const double r = realized[t * num_instruments + i];
      if (!std::isnan(r)) {
        s += r;
        ++c;
      }
    }
    if (c > 0) out[t] = s / static_cast<double>(c);
  }
  return out;
}

BacktestResult run_backtest(const PredictionSeries& preds, const std::vector<std::string>& dates,
                            const std::vector<std::string>& instruments, const std::vector<double>& realized,
                            const std::vector<double>& benchmark, const StrategyConfig& cfg) {
  cfg.validate();
  const std::size_t d = dates.size();
  const std::size_t n = instruments.size();
  if (realized.size() != d * n || benchmark.size() != d) throw ShapeError("backtest: return grids do not match dates");
  std::unordered_map<std::string, std::size_t> date_index, inst_index;
  for (std::size_t t = 0; t < d; ++t) date_index[dates[t]] = t;
  for (std::size_t i = 0; i < n; ++i) inst_index[instruments[i]] = i;

  std::map<std::size_t, std::vector<double>> scores;
  for (const auto& rec : preds.records) {
    const auto t = date_index.find(rec.date);
    const auto i = inst_index.find(rec.instrument);
    if (t == date_index.end()) throw DataError("backtest: prediction date " + rec.date + " not in the return calendar");
    if (i == inst_index.end()) throw DataError("backtest: unknown instrument " + rec.instrument);
    auto& row = scores[t->second];
    if (row.empty()) row.assign(n, std::numeric_limits<double>::quiet_NaN());
    row[i->second] = rec.score;
  }

  BacktestResult out;
  std::vector<std::size_t> holdings;
  double wealth = 1.0;
  for (const auto& [t, row] : scores) {
    if (t + 1 >= d) continue;
    const RebalanceResult rb = topk_dropout_rebalance(row, holdings, cfg);
    holdings = rb.holdings;
    if (rb.short_universe) ++out.short_days;
    double ret = 0.0;
    std::vector<std::string> names;
    if (!holdings.empty()) {
      const double w = 1.0 / static_cast<double>(holdings.size());
      for (std::size_t h : holdings) {
        const double r = realized[(t + 1) * n + h];
        if (std::isnan(r)) {
          ++out.frozen_positions;
        } else {
          ret += w * r;
        }
        names.push_back(instruments[h]);
      }
    }
    const double turnover = static_cast<double>(rb.bought.size() + rb.sold.size()) / static_cast<double>(cfg.k);
    ret -= turnover * cfg.cost_bps / 1e4;
    const double bench = benchmark[t + 1];
    if (std::isnan(bench)) throw DataError("backtest: missing benchmark return on " + dates[t + 1]);
    const double ex = ret - bench;
    wealth *= 1.0 + ex;
    out.dates.push_back(dates[t + 1]);
    out.portfolio.push_back(ret);
    out.benchmark.push_back(bench);
    out.excess.push_back(ex);
    out.cum_excess.push_back(wealth - 1.0);
    out.holdings.push_back(std::move(names));
    out.turnover.push_back(turnover);
  }
  return out;
}

PortfolioMetrics portfolio_metrics(const std::vector<double>& excess, const std::vector<double>& portfolio) {
  if (excess.size() < 2) throw DataError("portfolio metrics need at least two days");
  PortfolioMetrics m;
  const double n = static_cast<double>(excess.size());
  double mean = 0.0;
  for (double e : excess) mean += e;
  mean /= n;
  double ss = 0.0;
  for (double e : excess) ss += (e - mean) * (e - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  m.ar = mean * 252.0;
  if (sd > 0.0) {
    m.ir = mean / sd * std::sqrt(252.0);
  } else {
    m.ir_defined = false;
    m.ir = std::numeric_limits<double>::quiet_NaN();
  }
  m.sharpe = m.ir;

  double wealth = 1.0, peak = 1.0;
  for (double e : excess) {
    wealth *= 1.0 + e;
    peak = std::max(peak, wealth);
    m.md = std::min(m.md, wealth / peak - 1.0);
  }
  double growth = 1.0;
  for (double p : portfolio) growth *= 1.0 + p;
  m.cr = growth - 1.0;
  if (m.md != 0.0) {
    m.calmar = m.ar / std::abs(m.md);
  } else {
    m.calmar_defined = false;
    m.calmar = std::numeric_limits<double>::quiet_NaN();
  }
  return m;
}

std::string format_backtest_csv(const BacktestResult& r) {
  std::string out = "datetime,portfolio_ret,benchmark_ret,excess_ret,cum_excess\n";
  for (std::size_t t = 0; t < r.dates.size(); ++t) {
    out += r.dates[t] + ',' + csv::format_double(r.portfolio[t]) + ',' + csv::format_double(r.benchmark[t]) + ',' +
           csv::format_double(r.excess[t]) + ',' + csv::format_double(r.cum_excess[t]) + '\n';
  }
  return out;
}

std::string format_holdings_csv(const BacktestResult& r) {
  std::string out = "datetime,instrument\n";
  for (std::size_t t = 0; t < r.dates.size(); ++t) {
    for (const auto& name : r.holdings[t]) out += r.dates[t] + ',' + name + '\n';
  }
  return out;
}

std::string format_portfolio_metrics_csv(const PortfolioMetrics& m) {
  auto num = [](double v, bool ok) { return ok ? csv::format_double(v) : std::string("nan"); };
  std::string out = "metric,value\n";
  out += "AR," + csv::format_double(m.ar) + "\n";
  out += "IR," + num(m.ir, m.ir_defined) + "\n";
  out += "MD," + csv::format_double(m.md) + "\n";
  out += "CR," + csv::format_double(m.cr) + "\n";
  out += "Sharpe," + num(m.sharpe, m.ir_defined) + "\n";
  out += "Calmar," + num(m.calmar, m.calmar_defined) + "\n";
  return out;
}

}  // namespace act
