#pragma once

#include <cstdint>
#include <vector>

#include "act/data/panel.hpp"

namespace act {

// One training sample: the T dates ending at `end`, and the labels dated
// `end` (returns realised between end and end + 1).
struct Sample {
  std::size_t end = 0;
  Tensor features;                 // [T x N x F]
  std::vector<double> labels;      // [N]
  std::vector<std::uint8_t> mask;  // [N], label observed
};

// Samples for every end in [T-1, D-1), ordered by date. Throws ConfigError if
// T is zero or exceeds the number of dates.
std::vector<Sample> make_windows(const PanelDataset& ds, std::size_t T);

// Same, restricted to ends in [first_end, last_end).
std::vector<Sample> make_windows(const PanelDataset& ds, std::size_t T, std::size_t first_end,
                                 std::size_t last_end);

// Features [T x N x F] for the window ending at `end`.
Tensor window_features(const PanelDataset& ds, std::size_t end, std::size_t T);

}  // namespace act
