#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "act/data/panel.hpp"
#include "act/data/predictions.hpp"

namespace act {

// Pearson correlation; nullopt with fewer than two points or zero variance.
std::optional<double> pearson(const std::vector<double>& a, const std::vector<double>& b);
// Pearson on average ranks (ties share the mean of their positions, 1-based).
std::optional<double> spearman(const std::vector<double>& a, const std::vector<double>& b);
std::vector<double> average_ranks(const std::vector<double>& values);

struct MetricReport {
  double ic = 0.0;
  double icir = 0.0;
  double rank_ic = 0.0;
  double rank_icir = 0.0;
  bool icir_infinite = false;  // zero spread in daily IC; icir holds +-inf
  bool rank_icir_infinite = false;
  std::vector<std::string> dates;
  std::vector<double> daily_ic;
  std::vector<double> daily_rank_ic;
  std::size_t n_days = 0;
  std::size_t excluded_days = 0;  // fewer than two joint observations or no spread
  double avg_stocks = 0.0;        // mean joint cross-section over valid dates
  bool absent = false;            // subgroup too small to report
};

// Scores dated t against labels dated t (the return from t to t+1). With
// `universe`, only those instruments count. Throws DataError with fewer than
// two valid dates.
MetricReport summarize(const PredictionSeries& preds, const PanelDataset& ds,
                       const std::set<std::string>* universe = nullptr);

// Mean and sample-std ratio of a daily series, in date order.
MetricReport summarize_daily(std::vector<std::string> dates, std::vector<double> daily_ic,
                             std::vector<double> daily_rank_ic);

constexpr double kMinSubgroupStocks = 5.0;

// Per category. Categories averaging fewer than five stocks per date, or
// with fewer than two valid dates, are marked absent.
std::map<std::string, MetricReport> subgroup_metrics(const PredictionSeries& preds, const PanelDataset& ds,
                                                     const std::map<std::string, std::string>& grouping);

std::string format_metric_csv(const MetricReport& r);
std::string format_daily_csv(const MetricReport& r);
std::string format_subgroup_csv(const std::map<std::string, MetricReport>& groups);

}  // namespace act
