#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace act {

struct PredictionRecord {
  std::string date;
  std::string instrument;
  double score = 0.0;
};

// Records sorted by (date, instrument) with unique keys.
struct PredictionSeries {
  std::vector<PredictionRecord> records;

  // Sorts and throws DataError on a duplicate key or non-finite score.
  void normalize();
};

std::string format_predictions_csv(const PredictionSeries& preds);
PredictionSeries parse_predictions(const std::string& text, const std::string& source);
PredictionSeries load_predictions(const std::filesystem::path& path);
void write_predictions(const std::filesystem::path& path, const PredictionSeries& preds);

}  // namespace act
