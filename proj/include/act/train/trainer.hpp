#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "act/data/panel.hpp"
#include "act/data/predictions.hpp"
#include "act/model/config.hpp"
#include "act/model/params.hpp"
#include "act/train/adam.hpp"

namespace act {

struct TrainOptions {
  AdamConfig adam;
  std::size_t epochs = 30;
  std::size_t batch = 4;
  std::size_t patience = 5;
  std::uint64_t seed = 0;
  // First date of the validation and test periods; when empty the split
  // falls back to the fractions below.
  std::string valid_start;
  std::string test_start;
  double train_fraction = 0.6;
  double valid_fraction = 0.2;
  std::ostream* log = nullptr;
};

// Window ends: train [T-1, valid_start-1), validation [valid_start,
// test_start-1), test [test_start, D). A train label dated t is realised at
// t+1, so the last train label stays inside the training period.
struct DateSplit {
  std::size_t valid_start = 0;
  std::size_t test_start = 0;
};

DateSplit resolve_split(const PanelDataset& ds, const TrainOptions& opt);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_ic_term = 0.0;
  double train_mse_term = 0.0;
  double valid_ic = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t selected_epoch = 0;
  std::size_t skipped_ic_samples = 0;  // windows with fewer than two labels
};

struct TrainResult {
  Params params;  // best validation epoch
  TrainHistory history;
  DateSplit split;
};

// Preprocessed dataset expected (finite features). Deterministic per seed.
// Throws NumericError with epoch/step context on a non-finite loss.
TrainResult train(const PanelDataset& ds, const RelationGraphs& graphs, const ActConfig& cfg,
                  const TrainOptions& opt);

// Mean daily IC of eval-mode predictions for window ends in [first_end, last_end).
double validation_ic(const Params& params, const PanelDataset& ds, const RelationGraphs& graphs,
                     const ActConfig& cfg, std::size_t first_end, std::size_t last_end);

// One score per (window end, tradable instrument) for ends in
// [max(first_end, T-1), min(last_end, D)). Dropout off. Throws DataError when
// the range holds no complete window.
PredictionSeries predict_sliding(const Params& params, const PanelDataset& ds, const RelationGraphs& graphs,
                                 const ActConfig& cfg, std::size_t first_end, std::size_t last_end);

std::string format_history_csv(const TrainHistory& h);

}  // namespace act
