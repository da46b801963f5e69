#include "act/data/predictions.hpp"

#include <algorithm>
#include <cmath>

#include "act/data/csv.hpp"
#include "act/error.hpp"

namespace act {

void PredictionSeries::normalize() {
  std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    return a.date != b.date ? a.date < b.date : a.instrument < b.instrument;
  });
  for (std::size_t r = 0; r < records.size(); ++r) {
    if (!std::isfinite(records[r].score)) {
      throw DataError("non-finite score for (" + records[r].date + ", " + records[r].instrument + ")");
    }
    if (r > 0 && records[r].date == records[r - 1].date && records[r].instrument == records[r - 1].instrument) {
      throw DataError("duplicate prediction for (" + records[r].date + ", " + records[r].instrument + ")");
    }
  }
}

std::string format_predictions_csv(const PredictionSeries& preds) {
  std::string out = "datetime,instrument,score\n";
  for (const auto& r : preds.records) out += r.date + ',' + r.instrument + ',' + csv::format_double(r.score) + '\n';
  return out;
}

PredictionSeries parse_predictions(const std::string& text, const std::string& source) {
  const csv::Table t = csv::parse(text, source);
  const std::size_t c_date = t.column("datetime");
  const std::size_t c_inst = t.column("instrument");
  const std::size_t c_score = t.column("score");
  PredictionSeries out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string where = source + " row " + std::to_string(r + 2);
    if (!csv::is_iso_date(row[c_date])) throw DataError(where + ": bad date '" + row[c_date] + "'");
    out.records.push_back({row[c_date], row[c_inst], csv::parse_double(row[c_score], where)});
  }
  out.normalize();
  return out;
}

PredictionSeries load_predictions(const std::filesystem::path& path) {
  return parse_predictions(csv::read_text(path), path.string());
}

void write_predictions(const std::filesystem::path& path, const PredictionSeries& preds) {
  csv::write_text(path, format_predictions_csv(preds));
}

}  // namespace act
