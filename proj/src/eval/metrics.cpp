#include "act/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "act/data/csv.hpp"
#include "act/error.hpp"

namespace act {

std::optional<double> pearson(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw ShapeError("pearson: length mismatch");
  const std::size_t n = a.size();
  if (n < 2) return std::nullopt;
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) return std::nullopt;
  return sab / std::sqrt(saa * sbb);
}

std::vector<double> average_ranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return values[x] < values[y]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t m = i; m <= j; ++m) ranks[order[m]] = r;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> spearman(const std::vector<double>& a, const std::vector<double>& b) {
  return pearson(average_ranks(a), average_ranks(b));
}

namespace {

void mean_ratio(const std::vector<double>& xs, double& mean, double& ratio, bool& infinite) {
  const double n = static_cast<double>(xs.size());
  mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  infinite = !(sd > 0.0);
  if (infinite) {
    ratio = mean == 0.0 ? std::numeric_limits<double>::quiet_NaN()
                        : std::copysign(std::numeric_limits<double>::infinity(), mean);
  } else {
    ratio = mean / sd;
  }
}

}  // namespace

MetricReport summarize_daily(std::vector<std::string> dates, std::vector<double> daily_ic,
                             std::vector<double> daily_rank_ic) {
  if (dates.size() != daily_ic.size() || dates.size() != daily_rank_ic.size()) {
    throw ShapeError("summarize_daily: series length mismatch");
  }
  if (dates.size() < 2) throw DataError("metrics need at least two valid dates, got " + std::to_string(dates.size()));
  std::vector<std::size_t> order(dates.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dates[a] < dates[b]; });
  MetricReport r;
  for (std::size_t i : order) {
    r.dates.push_back(dates[i]);
    r.daily_ic.push_back(daily_ic[i]);
    r.daily_rank_ic.push_back(daily_rank_ic[i]);
  }
  r.n_days = r.dates.size();
  mean_ratio(r.daily_ic, r.ic, r.icir, r.icir_infinite);
  mean_ratio(r.daily_rank_ic, r.rank_ic, r.rank_icir, r.rank_icir_infinite);
  return r;
}

MetricReport summarize(const PredictionSeries& preds, const PanelDataset& ds, const std::set<std::string>* universe) {
  std::unordered_map<std::string, std::size_t> date_index, inst_index;
  for (std::size_t t = 0; t < ds.num_dates(); ++t) date_index[ds.dates[t]] = t;
  for (std::size_t i = 0; i < ds.num_instruments(); ++i) inst_index[ds.instruments[i]] = i;

  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> by_date;
  for (const auto& rec : preds.records) {
    if (universe != nullptr && universe->count(rec.instrument) == 0) continue;
    const auto t = date_index.find(rec.date);
    const auto i = inst_index.find(rec.instrument);
    auto& slot = by_date[rec.date];
    if (t == date_index.end() || i == inst_index.end() || !ds.observed(t->second, i->second)) continue;
    slot.first.push_back(rec.score);
    slot.second.push_back(ds.label(t->second, i->second));
  }
  std::vector<std::string> dates;
  std::vector<double> ic, ric;
  std::size_t excluded = 0;
  double stocks = 0.0;
  for (const auto& [date, xy] : by_date) {
    const auto p = pearson(xy.first, xy.second);
    const auto s = spearman(xy.first, xy.second);
    if (!p || !s) {
      ++excluded;
      continue;
    }
    dates.push_back(date);
    ic.push_back(*p);
    ric.push_back(*s);
    stocks += static_cast<double>(xy.first.size());
  }
  const std::size_t valid = dates.size();
  MetricReport r = summarize_daily(std::move(dates), std::move(ic), std::move(ric));
  r.excluded_days = excluded;
  r.avg_stocks = stocks / static_cast<double>(valid);
  return r;
}

std::map<std::string, MetricReport> subgroup_metrics(const PredictionSeries& preds, const PanelDataset& ds,
                                                     const std::map<std::string, std::string>& grouping) {
  std::map<std::string, std::set<std::string>> members;
  for (const auto& inst : ds.instruments) {
    const auto it = grouping.find(inst);
    if (it != grouping.end()) members[it->second].insert(inst);
  }
  std::map<std::string, MetricReport> out;
  for (const auto& [category, universe] : members) {
    MetricReport r;
    try {
      r = summarize(preds, ds, &universe);
      r.absent = r.avg_stocks < kMinSubgroupStocks;
    } catch (const DataError&) {
      r = MetricReport{};
      r.absent = true;
    }
    out.emplace(category, std::move(r));
  }
  return out;
}

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return csv::format_double(v);
}

}  // namespace

std::string format_metric_csv(const MetricReport& r) {
  std::string out = "metric,value\n";
  out += "ic," + num(r.ic) + "\n";
  out += "icir," + num(r.icir) + "\n";
  out += "rank_ic," + num(r.rank_ic) + "\n";
  out += "rank_icir," + num(r.rank_icir) + "\n";
  out += "n_days," + std::to_string(r.n_days) + "\n";
  out += "excluded_days," + std::to_string(r.excluded_days) + "\n";
  return out;
}

std::string format_daily_csv(const MetricReport& r) {
  std::string out = "datetime,ic,rank_ic\n";
  for (std::size_t t = 0; t < r.dates.size(); ++t) {
    out += r.dates[t] + ',' + num(r.daily_ic[t]) + ',' + num(r.daily_rank_ic[t]) + '\n';
  }
  return out;
}

std::string format_subgroup_csv(const std::map<std::string, MetricReport>& groups) {
  std::string out = "category,ic,icir,rank_ic,rank_icir,n_days,avg_stocks\n";
  for (const auto& [cat, r] : groups) {
    if (r.absent) {
      out += cat + ",--,--,--,--," + std::to_string(r.n_days) + ',' + num(r.avg_stocks) + '\n';
    } else {
      out += cat + ',' + num(r.ic) + ',' + num(r.icir) + ',' + num(r.rank_ic) + ',' + num(r.rank_icir) + ',' +
             std::to_string(r.n_days) + ',' + num(r.avg_stocks) + '\n';
    }
  }
  return out;
}

}  // namespace act
