#pragma once

#include <cstdint>
#include <vector>

#include "act/tensor/tensor.hpp"

namespace act {

constexpr double kLabelClip = 0.1;
constexpr double kIcEpsilon = 1e-8;

// 1 - corr(yhat, clip(y)) over observed entries, eps inside both roots.
// Throws DataError when fewer than two entries are observed.
Tensor ic_loss(const Tensor& yhat, const std::vector<double>& y, const std::vector<std::uint8_t>& mask);

// Mean of (yhat - clip(y))^2 over observed entries. Throws DataError if none.
Tensor mse_loss(const Tensor& yhat, const std::vector<double>& y, const std::vector<std::uint8_t>& mask);

struct LossTerms {
  Tensor total;
  double ic = 0.0;
  double mse = 0.0;
  bool ic_skipped = false;  // fewer than two observed labels
};

// ic_loss + lambda * mse_loss; the IC term is dropped (and flagged) when
// fewer than two labels are observed.
LossTerms total_loss(const Tensor& yhat, const std::vector<double>& y, const std::vector<std::uint8_t>& mask,
                     double lambda);

}  // namespace act
