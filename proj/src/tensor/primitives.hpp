#pragma once

// Internal forward/VJP entry points shared by ops.cpp and tape.cpp.

#include <span>
#include <vector>

#include "act/tensor/tape.hpp"

namespace act::detail {

void validate_attrs(PrimitiveKind kind, const Attrs& attrs);

Tensor forward(PrimitiveKind kind, std::span<const Tensor> inputs, const Attrs& attrs,
               std::vector<double>& aux);

// Accumulates the vector-Jacobian product of `node` into input_grads. Entries
// are nullptr for inputs that need no gradient.
void vjp(const Tape::Node& node, std::span<const double> grad_out,
         std::span<std::vector<double>*> input_grads);

}  // namespace act::detail
