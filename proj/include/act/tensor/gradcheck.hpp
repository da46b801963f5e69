#pragma once

#include <functional>
#include <vector>

#include "act/tensor/tensor.hpp"

namespace act {

using ScalarFn = std::function<Tensor(const Tensor&)>;
using MultiScalarFn = std::function<Tensor(const std::vector<Tensor>&)>;

// Max over coordinates of |analytic - central difference| / max(1, |analytic|).
// f must be deterministic; a second evaluation at the same point that differs
// raises NumericError.
double finite_difference_check(const ScalarFn& f, const Tensor& point, double step);

// Same check over several inputs at once (e.g. a parameter list).
double finite_difference_check(const MultiScalarFn& f, const std::vector<Tensor>& points,
                               double step);

}  // namespace act
