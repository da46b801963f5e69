#pragma once

#include <cstddef>

#include "act/tensor/tensor.hpp"

namespace act {

struct Decomposition {
  Tensor trend;
  Tensor fluct;
  Tensor shock;
  std::size_t tau = 0;
  std::size_t sigma = 0;
};

// Trailing mean along axis 0: out[t] = mean(seq[max(0, t-w+1) .. t]).
// Each output sums its window in time order, so results match a direct loop
// bit for bit. Non-finite outputs are zeroed. Throws ConfigError if w < 1.
Tensor causal_moving_average(const Tensor& seq, std::size_t w);

// trend = CMA(X, tau); fluct = CMA(X - trend, sigma); shock = X - trend - fluct.
Decomposition tcd_decompose(const Tensor& x, std::size_t tau, std::size_t sigma);

}  // namespace act
