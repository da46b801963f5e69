#include "act/train/loss.hpp"

#include <algorithm>

#include "act/error.hpp"
#include "act/tensor/ops.hpp"

namespace act {

namespace {

std::size_t check(const Tensor& yhat, const std::vector<double>& y, const std::vector<std::uint8_t>& mask) {
  if (yhat.rank() != 1 || y.size() != yhat.size() || mask.size() != yhat.size()) {
    throw ShapeError("loss: prediction " + shape_string(yhat.shape()) + " vs " + std::to_string(y.size()) +
                     " labels and " + std::to_string(mask.size()) + " mask entries");
  }
  return static_cast<std::size_t>(std::count_if(mask.begin(), mask.end(), [](auto m) { return m != 0; }));
}

Tensor clipped_labels(const std::vector<double>& y, const std::vector<std::uint8_t>& mask) {
  std::vector<double> out;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (mask[i]) out.push_back(std::clamp(y[i], -kLabelClip, kLabelClip));
  }
  const std::size_t n = out.size();
  return Tensor(Shape{n}, std::move(out));
}

}  // namespace

Tensor ic_loss(const Tensor& yhat, const std::vector<double>& y, const std::vector<std::uint8_t>& mask) {
  if (check(yhat, y, mask) < 2) throw DataError("ic_loss needs at least two observed labels");
  const Tensor p = ops::masked_select(yhat, mask);
  const Tensor yc = clipped_labels(y, mask);
  const Tensor pc = ops::sub(p, ops::mean_axis(p, 0));
  const Tensor lc = ops::sub(yc, ops::mean_axis(yc, 0));
  const Tensor eps = Tensor::scalar(kIcEpsilon);
  const Tensor num = ops::sum_all(ops::mul(pc, lc));
  const Tensor den = ops::mul(ops::sqrt(ops::add(ops::sum_all(ops::mul(pc, pc)), eps)),
                              ops::sqrt(ops::add(ops::sum_all(ops::mul(lc, lc)), eps)));
  return ops::sub(Tensor::scalar(1.0), ops::div(num, den));
}

Tensor mse_loss(const Tensor& yhat, const std::vector<double>& y, const std::vector<std::uint8_t>& mask) {
  if (check(yhat, y, mask) < 1) throw DataError("mse_loss needs at least one observed label");
  const Tensor diff = ops::sub(ops::masked_select(yhat, mask), clipped_labels(y, mask));
  return ops::mean_axis(ops::mul(diff, diff), 0);
}

LossTerms total_loss(const Tensor& yhat, const std::vector<double>& y, const std::vector<std::uint8_t>& mask,
                     double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda must be in [0, 1]");
  LossTerms out;
  const Tensor mse = mse_loss(yhat, y, mask);
  out.mse = mse.item();
  const Tensor weighted = ops::mul(mse, Tensor::scalar(lambda));
  if (check(yhat, y, mask) < 2) {
    out.ic_skipped = true;
    out.total = weighted;
    return out;
  }
  const Tensor ic = ic_loss(yhat, y, mask);
  out.ic = ic.item();
  out.total = ops::add(ic, weighted);
  return out;
}

}  // namespace act
