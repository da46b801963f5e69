#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "act/data/panel.hpp"

namespace act {

// Planted market: industries are contiguous blocks of `industry_size`
// instruments sharing a persistent latent factor that leaks into f0. Labels
// load on the smoothed industry factor plus two stock-level features (f1, f2).
// f3 carries a region factor that never touches returns; the remaining
// features are pure noise.
struct SyntheticConfig {
  std::size_t num_instruments = 24;
  std::size_t num_features = 8;
  std::size_t days = 600;
  std::size_t tau_signal = 20;
  double noise = 1.0;
  std::uint64_t seed = 7;
  std::size_t industry_size = 5;
  std::size_t num_regions = 3;
  std::size_t lookback = 40;
  double trend_weight = 1.5;
  double signal_weight = 0.5;
  double idio_scale = 3.0;
};

// The quantities labels were generated from, row-major [days x N].
struct SyntheticTruth {
  std::vector<double> industry_trend;
  std::vector<double> signal1;
  std::vector<double> signal2;
  std::vector<double> clean_return;  // label before rounding through prices
};

struct SyntheticMarket {
  PanelDataset dataset;
  RelationGraphs graphs;
  FactorSeries factors;
  PriceGrid prices;
  std::map<std::string, std::string> industry;
  std::map<std::string, std::string> region;
  SyntheticTruth truth;
};

// Throws ConfigError when N < 4, F < 4 or days < 3 * lookback.
SyntheticMarket generate_synthetic(const SyntheticConfig& cfg);

// Business days (Mon-Fri) starting at 2020-01-01.
std::vector<std::string> business_days(std::size_t count);

}  // namespace act
