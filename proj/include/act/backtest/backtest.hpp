#pragma once

#include <string>
#include <vector>

#include "act/data/predictions.hpp"

namespace act {

struct StrategyConfig {
  std::size_t k = 50;
  std::size_t n_drop = 5;
  double cost_bps = 0.0;
  void validate() const;  // 1 <= n_drop <= k
};

struct RebalanceResult {
  std::vector<std::size_t> holdings;  // sorted instrument indices
  std::vector<std::size_t> bought;
  std::vector<std::size_t> sold;
  bool short_universe = false;  // fewer than k names could be held
};

// scores[i] is NaN for unscored instruments. Current holdings are ranked by
// today's score (unscored worst, ties to the lower index) and the worst
// max(0, |H| + n_drop - k) are sold; the best-scored names outside the kept
// set, just-sold ones included, are bought until k are held.
RebalanceResult topk_dropout_rebalance(const std::vector<double>& scores, const std::vector<std::size_t>& holdings,
                                       const StrategyConfig& cfg);

struct BacktestResult {
  std::vector<std::string> dates;  // return dates
  std::vector<double> portfolio;
  std::vector<double> benchmark;
  std::vector<double> excess;
  std::vector<double> cum_excess;                     // compounded
  std::vector<std::vector<std::string>> holdings;     // held over each return date
  std::vector<double> turnover;                       // traded names / k
  std::size_t frozen_positions = 0;  // holdings with no realised return (counted as 0)
  std::size_t short_days = 0;
};

// realized[t * N + i] is the return of instrument i earned on date t (NaN when
// unknown); benchmark[t] likewise. Scores dated t set the holdings whose
// returns are read on date t + 1; the last date's scores are unused.
BacktestResult run_backtest(const PredictionSeries& preds, const std::vector<std::string>& dates,
                            const std::vector<std::string>& instruments, const std::vector<double>& realized,
                            const std::vector<double>& benchmark, const StrategyConfig& cfg);

// Mean realised return over instruments with a value, per date (NaN if none).
std::vector<double> equal_weight_benchmark(const std::vector<double>& realized, std::size_t num_dates,
                                           std::size_t num_instruments);

struct PortfolioMetrics {
  double ar = 0.0;
  double ir = 0.0;
  double md = 0.0;
  double cr = 0.0;
  double sharpe = 0.0;
  double calmar = 0.0;
  bool ir_defined = true;      // false when excess returns have zero spread
  bool calmar_defined = true;  // false when there was no drawdown
};

// AR = 252 mean(excess); IR = Sharpe = sqrt(252) mean/std(excess) with sample
// std; MD over the compounded excess curve starting from 1; CR compounds the
// portfolio returns; Calmar = AR / |MD|. Throws DataError with fewer than 2 days.
PortfolioMetrics portfolio_metrics(const std::vector<double>& excess, const std::vector<double>& portfolio);

std::string format_backtest_csv(const BacktestResult& r);
std::string format_holdings_csv(const BacktestResult& r);
std::string format_portfolio_metrics_csv(const PortfolioMetrics& m);

}  // namespace act
