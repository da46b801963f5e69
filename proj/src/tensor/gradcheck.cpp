#include "act/tensor/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "act/error.hpp"
#include "act/tensor/tape.hpp"

namespace act {

double finite_difference_check(const ScalarFn& f, const Tensor& point, double step) {
  const MultiScalarFn wrapped = [&f](const std::vector<Tensor>& xs) { return f(xs[0]); };
  return finite_difference_check(wrapped, std::vector<Tensor>{point}, step);
}

double finite_difference_check(const MultiScalarFn& f, const std::vector<Tensor>& points,
                               double step) {
  if (!(step > 0.0)) throw std::invalid_argument("finite_difference_check: step must be > 0");

  std::vector<Tensor> analytic;
  {
    Tape tape;
    TapeScope scope(tape);
    std::vector<Tensor> watched;
    watched.reserve(points.size());
    for (const Tensor& p : points) watched.push_back(tape.watch(p));
    const Tensor loss = f(watched);
    tape.backward(loss);
    for (const Tensor& w : watched) analytic.push_back(tape.gradient(w));
  }

  std::vector<Tensor> probe;
  probe.reserve(points.size());
  for (const Tensor& p : points) probe.push_back(p.detach());

  const double base_a = f(probe).item();
  const double base_b = f(probe).item();
  if (base_a != base_b) {
    throw NumericError("finite_difference_check: function is not deterministic");
  }

  double worst = 0.0;
  for (std::size_t t = 0; t < probe.size(); ++t) {
    auto values = probe[t].mutable_values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + step;
      const double up = f(probe).item();
      values[i] = saved - step;
      const double down = f(probe).item();
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[t][i];
      worst = std::max(worst, std::abs(a - numeric) / std::max(1.0, std::abs(a)));
    }
  }
  return worst;
}

}  // namespace act
