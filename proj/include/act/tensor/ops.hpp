#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

#include "act/tensor/tape.hpp"
#include "act/tensor/tensor.hpp"

namespace act {

// Evaluates one primitive. When a tape is active and any input is tracked by
// it, the application is recorded for backward(). Throws ShapeError on shape
// mismatch, std::invalid_argument on an attribute the kind does not accept,
// and NumericError if the result contains NaN or Inf.
Tensor apply_primitive(PrimitiveKind kind, std::span<const Tensor> inputs,
                       const Attrs& attrs = {});

namespace ops {

// a: [..., K], b: [K, M] -> [..., M]
Tensor matmul(const Tensor& a, const Tensor& b);

// Elementwise with numpy-style broadcasting.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);

// All inputs share every axis but the last.
Tensor concat_last(std::span<const Tensor> parts);
Tensor concat_last(std::initializer_list<Tensor> parts);

// Time-major causal convolution with left zero padding of (K-1)*dilation:
//   x: [T, B, Cin], w: [K, Cin, Cout], bias: [Cout] -> [T, B, Cout]
//   out[t] = bias + sum_k x[t - (K-1-k)*dilation] * w[k]
Tensor causal_conv1d(const Tensor& x, const Tensor& w, const Tensor& bias,
                     std::size_t dilation = 1);

// Normalizes the last axis, then applies gamma/beta.
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  double epsilon = 1e-5);

Tensor leaky_relu(const Tensor& x, double slope);
Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor tanh(const Tensor& x);

// Masked entries (mask[i] == 0, same size as x) get probability exactly 0.
Tensor softmax(const Tensor& x, int axis, std::vector<std::uint8_t> mask = {});

// Inverted dropout; identity when !training.
Tensor dropout(const Tensor& x, double rate, bool training, std::mt19937_64& rng);

// Reduce and drop the axis.
Tensor mean_axis(const Tensor& x, int axis);
Tensor sum_axis(const Tensor& x, int axis);
// Sum of all entries as a rank-0 tensor.
Tensor sum_all(const Tensor& x);

Tensor clip(const Tensor& x, double lo, double hi);
Tensor sqrt(const Tensor& x);

// Rows along axis 0.
Tensor gather_rows(const Tensor& x, std::vector<std::size_t> indices);
// Flat selection of entries with mask != 0 -> [count].
Tensor masked_select(const Tensor& x, std::vector<std::uint8_t> mask);
// x: [M, ...] placed (summed) into rows `indices` of a zero [rows, ...] tensor.
Tensor scatter_rows(const Tensor& x, std::vector<std::size_t> indices, std::size_t rows);

Tensor reshape(const Tensor& x, Shape shape);

}  // namespace ops
}  // namespace act
