#include "act/decompose/decompose.hpp"

#include <cmath>

#include "act/error.hpp"
#include "act/simd/kernels.hpp"

namespace act {

Tensor causal_moving_average(const Tensor& seq, std::size_t w) {
  if (w < 1) throw ConfigError("moving average window must be >= 1");
  if (seq.rank() == 0) throw ShapeError("moving average needs a time axis");
  const std::size_t steps = seq.shape()[0];
  const std::size_t lanes = steps == 0 ? 0 : seq.size() / steps;
  const auto& k = simd::kernels();
  const double* x = seq.data();
  std::vector<double> out(seq.size());
  std::vector<double> acc(lanes);
  for (std::size_t t = 0; t < steps; ++t) {
    const std::size_t lo = t + 1 >= w ? t + 1 - w : 0;
    std::copy(x + lo * lanes, x + (lo + 1) * lanes, acc.begin());
    for (std::size_t j = lo + 1; j <= t; ++j) k.add(acc.data(), x + j * lanes, acc.data(), lanes);
    const double count = static_cast<double>(t - lo + 1);
    double* dst = out.data() + t * lanes;
    for (std::size_t l = 0; l < lanes; ++l) {
      const double v = acc[l] / count;
      dst[l] = std::isfinite(v) ? v : 0.0;
    }
  }
  return Tensor(seq.shape(), std::move(out));
}

Decomposition tcd_decompose(const Tensor& x, std::size_t tau, std::size_t sigma) {
  if (tau < 1 || sigma < 1) throw ConfigError("decomposition windows must be >= 1");
  const auto& k = simd::kernels();
  Decomposition d;
  d.tau = tau;
  d.sigma = sigma;
  d.trend = causal_moving_average(x, tau);
  std::vector<double> det(x.size());
  k.sub(x.data(), d.trend.data(), det.data(), det.size());
  Tensor det_t(x.shape(), std::move(det));
  d.fluct = causal_moving_average(det_t, sigma);
  std::vector<double> shock(x.size());
  k.sub(det_t.data(), d.fluct.data(), shock.data(), shock.size());
  d.shock = Tensor(x.shape(), std::move(shock));
  return d;
}

}  // namespace act
