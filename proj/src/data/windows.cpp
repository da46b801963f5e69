#include "act/data/windows.hpp"

#include <algorithm>
#include <cmath>

#include "act/error.hpp"

namespace act {

Tensor window_features(const PanelDataset& ds, std::size_t end, std::size_t T) {
  if (T == 0 || end + 1 < T || end >= ds.num_dates()) {
    throw ConfigError("window ending at " + std::to_string(end) + " with length " +
                      std::to_string(T) + " does not fit " + std::to_string(ds.num_dates()) +
                      " dates");
  }
  const std::size_t row = ds.num_instruments() * ds.num_features;
  const std::size_t start = end + 1 - T;
  const auto src = ds.features.values().subspan(start * row, T * row);
  return Tensor(Shape{T, ds.num_instruments(), ds.num_features},
                std::vector<double>(src.begin(), src.end()));
}

std::vector<Sample> make_windows(const PanelDataset& ds, std::size_t T, std::size_t first_end,
                                 std::size_t last_end) {
  if (T == 0 || T > ds.num_dates()) {
    throw ConfigError("window length " + std::to_string(T) + " exceeds " +
                      std::to_string(ds.num_dates()) + " dates");
  }
  const std::size_t n = ds.num_instruments();
  first_end = std::max(first_end, T - 1);
  last_end = std::min(last_end, ds.num_dates() - 1);
  std::vector<Sample> out;
  for (std::size_t t = first_end; t < last_end; ++t) {
    Sample s;
    s.end = t;
    s.features = window_features(ds, t, T);
    s.labels.resize(n);
    s.mask.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      s.mask[i] = ds.observed(t, i) ? 1 : 0;
      s.labels[i] = s.mask[i] ? ds.label(t, i) : 0.0;
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Sample> make_windows(const PanelDataset& ds, std::size_t T) {
  return make_windows(ds, T, 0, ds.num_dates());
}

}  // namespace act
