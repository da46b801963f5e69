#include "act/tensor/ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "act/error.hpp"
#include "act/simd/kernels.hpp"
#include "primitives.hpp"

namespace act {

namespace {

using simd::kernels;

[[noreturn]] void shape_fail(PrimitiveKind kind, const std::string& what) {
  throw ShapeError(std::string(kind_name(kind)) + ": " + what);
}

std::size_t normalize_axis(PrimitiveKind kind, int axis, std::size_t rank) {
  const int r = static_cast<int>(rank);
  const int a = axis < 0 ? axis + r : axis;
  if (a < 0 || a >= r) shape_fail(kind, "axis " + std::to_string(axis) + " out of range");
  return static_cast<std::size_t>(a);
}

struct AxisSplit {
  std::size_t outer = 1;
  std::size_t len = 1;
  std::size_t inner = 1;
};

AxisSplit split_at(const Shape& shape, std::size_t axis) {
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.len = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

// ---------------------------------------------------------------------------
// Broadcasting

enum class BroadcastMode { same, rhs_suffix, lhs_suffix, general };

struct BroadcastPlan {
  Shape out;
  BroadcastMode mode = BroadcastMode::general;
  std::size_t inner = 1;  // size of the suffix operand
  std::vector<std::size_t> stride_a;
  std::vector<std::size_t> stride_b;
};

std::vector<std::size_t> aligned_strides(const Shape& in, const Shape& out) {
  std::vector<std::size_t> strides(out.size(), 0);
  std::size_t stride = 1;
  const std::size_t offset = out.size() - in.size();
  for (std::size_t i = in.size(); i-- > 0;) {
    strides[i + offset] = in[i] == 1 ? 0 : stride;
    stride *= in[i];
  }
  return strides;
}

bool is_suffix_of(const Shape& small, const Shape& big) {
  std::size_t start = 0;
  while (start < small.size() && small[start] == 1) ++start;
  const std::size_t len = small.size() - start;
  if (len > big.size()) return false;
  return std::equal(small.begin() + static_cast<std::ptrdiff_t>(start), small.end(),
                    big.end() - static_cast<std::ptrdiff_t>(len));
}

BroadcastPlan plan_broadcast(PrimitiveKind kind, const Shape& a, const Shape& b) {
  BroadcastPlan plan;
  const std::size_t rank = std::max(a.size(), b.size());
  plan.out.assign(rank, 1);
  for (std::size_t i = 0; i < rank; ++i) {
    const std::size_t da = i + a.size() >= rank ? a[i + a.size() - rank] : 1;
    const std::size_t db = i + b.size() >= rank ? b[i + b.size() - rank] : 1;
    if (da != db && da != 1 && db != 1) {
      shape_fail(kind, "cannot broadcast " + shape_string(a) + " with " + shape_string(b));
    }
    plan.out[i] = da == 1 ? db : da;
  }
  if (a == b) {
    plan.mode = BroadcastMode::same;
  } else if (plan.out == a && is_suffix_of(b, a)) {
    plan.mode = BroadcastMode::rhs_suffix;
    plan.inner = shape_size(b);
  } else if (plan.out == b && is_suffix_of(a, b)) {
    plan.mode = BroadcastMode::lhs_suffix;
    plan.inner = shape_size(a);
  } else {
    plan.mode = BroadcastMode::general;
    plan.stride_a = aligned_strides(a, plan.out);
    plan.stride_b = aligned_strides(b, plan.out);
  }
  return plan;
}

// Calls fn(out_index, a_index, b_index) for every output element.
template <typename Fn>
void for_each_general(const BroadcastPlan& plan, Fn fn) {
  const std::size_t rank = plan.out.size();
  const std::size_t total = shape_size(plan.out);
  std::vector<std::size_t> counter(rank, 0);
  std::size_t ia = 0;
  std::size_t ib = 0;
  for (std::size_t o = 0; o < total; ++o) {
    fn(o, ia, ib);
    for (std::size_t axis = rank; axis-- > 0;) {
      ++counter[axis];
      ia += plan.stride_a[axis];
      ib += plan.stride_b[axis];
      if (counter[axis] < plan.out[axis]) break;
      ia -= plan.stride_a[axis] * counter[axis];
      ib -= plan.stride_b[axis] * counter[axis];
      counter[axis] = 0;
    }
  }
}

// Values of operand `which` (0 = a, 1 = b) laid out in the output shape.
std::vector<double> expand(const BroadcastPlan& plan, int which, const Tensor& operand) {
  const std::size_t total = shape_size(plan.out);
  const double* src = operand.data();
  std::vector<double> out(total);
  const bool is_full = plan.mode == BroadcastMode::same ||
                       (plan.mode == BroadcastMode::rhs_suffix && which == 0) ||
                       (plan.mode == BroadcastMode::lhs_suffix && which == 1);
  if (is_full) {
    std::copy(src, src + total, out.begin());
  } else if (plan.mode != BroadcastMode::general) {
    for (std::size_t r = 0; r < total; r += plan.inner) {
      std::copy(src, src + plan.inner, out.begin() + static_cast<std::ptrdiff_t>(r));
    }
  } else {
    for_each_general(plan, [&](std::size_t o, std::size_t ia, std::size_t ib) {
      out[o] = src[which == 0 ? ia : ib];
    });
  }
  return out;
}

// grad += reduction of an output-shaped contribution onto operand `which`.
void reduce_into(const BroadcastPlan& plan, int which, const std::vector<double>& contrib,
                 std::vector<double>& grad) {
  const auto& k = kernels();
  const std::size_t total = contrib.size();
  const bool is_full = plan.mode == BroadcastMode::same ||
                       (plan.mode == BroadcastMode::rhs_suffix && which == 0) ||
                       (plan.mode == BroadcastMode::lhs_suffix && which == 1);
  if (is_full) {
    k.add(grad.data(), contrib.data(), grad.data(), total);
  } else if (plan.mode != BroadcastMode::general) {
    for (std::size_t r = 0; r < total; r += plan.inner) {
      k.add(grad.data(), contrib.data() + r, grad.data(), plan.inner);
    }
  } else {
    for_each_general(plan, [&](std::size_t o, std::size_t ia, std::size_t ib) {
      grad[which == 0 ? ia : ib] += contrib[o];
    });
  }
}

using KernelBinary = void (*)(const double*, const double*, double*, std::size_t);

template <typename ScalarOp>
Tensor binary_forward(PrimitiveKind kind, const Tensor& a, const Tensor& b,
                      KernelBinary kernel, ScalarOp op) {
  const BroadcastPlan plan = plan_broadcast(kind, a.shape(), b.shape());
  std::vector<double> out(shape_size(plan.out));
  const double* pa = a.data();
  const double* pb = b.data();
  switch (plan.mode) {
    case BroadcastMode::same:
      if (kernel != nullptr) {
        kernel(pa, pb, out.data(), out.size());
      } else {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = op(pa[i], pb[i]);
      }
      break;
    case BroadcastMode::rhs_suffix:
      for (std::size_t r = 0; r < out.size(); r += plan.inner) {
        if (kernel != nullptr) {
          kernel(pa + r, pb, out.data() + r, plan.inner);
        } else {
          for (std::size_t i = 0; i < plan.inner; ++i) out[r + i] = op(pa[r + i], pb[i]);
        }
      }
      break;
    case BroadcastMode::lhs_suffix:
      for (std::size_t r = 0; r < out.size(); r += plan.inner) {
        if (kernel != nullptr) {
          kernel(pa, pb + r, out.data() + r, plan.inner);
        } else {
          for (std::size_t i = 0; i < plan.inner; ++i) out[r + i] = op(pa[i], pb[r + i]);
        }
      }
      break;
    case BroadcastMode::general:
      for_each_general(plan, [&](std::size_t o, std::size_t ia, std::size_t ib) {
        out[o] = op(pa[ia], pb[ib]);
      });
      break;
  }
  return Tensor(plan.out, std::move(out));
}

// ---------------------------------------------------------------------------
// Forward implementations

Tensor matmul_forward(const Tensor& a, const Tensor& b) {
  constexpr auto kind = PrimitiveKind::matmul;
  if (b.rank() != 2) shape_fail(kind, "rhs must be rank 2, got " + shape_string(b.shape()));
  if (a.rank() < 1) shape_fail(kind, "lhs must have rank >= 1");
  const std::size_t k = b.shape()[0];
  const std::size_t m = b.shape()[1];
  if (a.shape().back() != k) {
    shape_fail(kind, shape_string(a.shape()) + " x " + shape_string(b.shape()));
  }
  const std::size_t rows = a.size() / std::max<std::size_t>(k, 1);
  Shape out_shape = a.shape();
  out_shape.back() = m;
  std::vector<double> out(rows * m, 0.0);
  kernels().gemm_nn(rows, m, k, a.data(), b.data(), out.data());
  return Tensor(std::move(out_shape), std::move(out));
}

Tensor concat_forward(std::span<const Tensor> parts) {
  constexpr auto kind = PrimitiveKind::concat_last;
  if (parts.empty()) shape_fail(kind, "no inputs");
  const Shape& first = parts[0].shape();
  if (first.empty()) shape_fail(kind, "inputs must have rank >= 1");
  std::size_t total_last = 0;
  for (const Tensor& p : parts) {
    const Shape& s = p.shape();
    if (s.size() != first.size() || !std::equal(s.begin(), s.end() - 1, first.begin())) {
      shape_fail(kind, "leading axes differ: " + shape_string(s) + " vs " + shape_string(first));
    }
    total_last += s.back();
  }
  const std::size_t rows = shape_size(first) / std::max<std::size_t>(first.back(), 1);
  Shape out_shape = first;
  out_shape.back() = total_last;
  std::vector<double> out(rows * total_last);
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t col = 0;
    for (const Tensor& p : parts) {
      const std::size_t w = p.shape().back();
      std::copy_n(p.data() + r * w, w, out.data() + r * total_last + col);
      col += w;
    }
  }
  return Tensor(std::move(out_shape), std::move(out));
}

Tensor conv_forward(const Tensor& x, const Tensor& w, const Tensor& bias, std::size_t dilation) {
  constexpr auto kind = PrimitiveKind::causal_conv1d;
  if (x.rank() != 3) shape_fail(kind, "input must be [T, B, Cin], got " + shape_string(x.shape()));
  if (w.rank() != 3) shape_fail(kind, "weight must be [K, Cin, Cout], got " + shape_string(w.shape()));
  const std::size_t t_len = x.shape()[0];
  const std::size_t batch = x.shape()[1];
  const std::size_t cin = x.shape()[2];
  const std::size_t ksize = w.shape()[0];
  const std::size_t cout = w.shape()[2];
  if (w.shape()[1] != cin) shape_fail(kind, "weight Cin mismatch");
  if (bias.rank() != 1 || bias.shape()[0] != cout) shape_fail(kind, "bias must be [Cout]");
  if (dilation == 0) shape_fail(kind, "dilation must be >= 1");
  std::vector<double> out(t_len * batch * cout);
  for (std::size_t r = 0; r < t_len * batch; ++r) {
    std::copy_n(bias.data(), cout, out.data() + r * cout);
  }
  for (std::size_t k = 0; k < ksize; ++k) {
    const std::size_t shift = (ksize - 1 - k) * dilation;
    if (shift >= t_len) continue;
    kernels().gemm_nn((t_len - shift) * batch, cout, cin, x.data(), w.data() + k * cin * cout,
                      out.data() + shift * batch * cout);
  }
  return Tensor(Shape{t_len, batch, cout}, std::move(out));
}

Tensor layer_norm_forward(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                          double epsilon, std::vector<double>& aux) {
  constexpr auto kind = PrimitiveKind::layer_norm;
  if (x.rank() < 1) shape_fail(kind, "input must have rank >= 1");
  const std::size_t d = x.shape().back();
  if (gamma.shape() != Shape{d} || beta.shape() != Shape{d}) {
    shape_fail(kind, "gamma/beta must be [" + std::to_string(d) + "]");
  }
  const std::size_t rows = d == 0 ? 0 : x.size() / d;
  const auto& k = kernels();
  std::vector<double> out(x.size());
  aux.assign(2 * rows, 0.0);
  const double inv_d = 1.0 / static_cast<double>(d);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = x.data() + r * d;
    const double mean = k.sum(row, d) * inv_d;
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double c = row[j] - mean;
      var += c * c;
    }
    var *= inv_d;
    const double rstd = 1.0 / std::sqrt(var + epsilon);
    aux[2 * r] = mean;
    aux[2 * r + 1] = rstd;
    double* orow = out.data() + r * d;
    for (std::size_t j = 0; j < d; ++j) {
      orow[j] = (row[j] - mean) * rstd * gamma[j] + beta[j];
    }
  }
  return Tensor(x.shape(), std::move(out));
}

template <typename Fn>
Tensor unary_forward(const Tensor& x, Fn fn) {
  std::vector<double> out(x.size());
  const double* px = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fn(px[i]);
  return Tensor(x.shape(), std::move(out));
}

Tensor softmax_forward(const Tensor& x, const Attrs& attrs) {
  constexpr auto kind = PrimitiveKind::softmax_axis;
  const std::size_t axis = normalize_axis(kind, *attrs.axis, x.rank());
  const AxisSplit s = split_at(x.shape(), axis);
  const bool masked = !attrs.mask.empty();
  if (masked && attrs.mask.size() != x.size()) shape_fail(kind, "mask size mismatch");
  std::vector<double> out(x.size(), 0.0);
  const double* px = x.data();
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t i = 0; i < s.inner; ++i) {
      const std::size_t base = o * s.len * s.inner + i;
      double mx = -INFINITY;
      bool any = false;
      for (std::size_t j = 0; j < s.len; ++j) {
        const std::size_t at = base + j * s.inner;
        if (masked && attrs.mask[at] == 0) continue;
        mx = std::max(mx, px[at]);
        any = true;
      }
      if (!any) throw NumericError("softmax-axis: every entry of a slice is masked");
      double total = 0.0;
      for (std::size_t j = 0; j < s.len; ++j) {
        const std::size_t at = base + j * s.inner;
        if (masked && attrs.mask[at] == 0) continue;
        out[at] = std::exp(px[at] - mx);
        total += out[at];
      }
      const double inv = 1.0 / total;
      for (std::size_t j = 0; j < s.len; ++j) out[base + j * s.inner] *= inv;
    }
  }
  return Tensor(x.shape(), std::move(out));
}

// 53-bit uniform in [0, 1); avoids implementation-defined distributions so the
// mask sequence is portable for a given seed.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Tensor dropout_forward(const Tensor& x, const Attrs& attrs, std::vector<double>& aux) {
  const double rate = *attrs.rate;
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw std::invalid_argument("dropout: rate must be in [0, 1)");
  }
  aux.assign(x.size(), 1.0);
  if (*attrs.training && rate > 0.0) {
    if (attrs.rng == nullptr) throw std::invalid_argument("dropout: training requires rng");
    const double keep_scale = 1.0 / (1.0 - rate);
    for (double& m : aux) m = uniform01(*attrs.rng) < rate ? 0.0 : keep_scale;
  }
  std::vector<double> out(x.size());
  kernels().mul(x.data(), aux.data(), out.data(), out.size());
  return Tensor(x.shape(), std::move(out));
}

Tensor reduce_forward(PrimitiveKind kind, const Tensor& x, int axis_attr) {
  const std::size_t axis = normalize_axis(kind, axis_attr, x.rank());
  const AxisSplit s = split_at(x.shape(), axis);
  Shape out_shape = x.shape();
  out_shape.erase(out_shape.begin() + static_cast<std::ptrdiff_t>(axis));
  std::vector<double> out(s.outer * s.inner, 0.0);
  const auto& k = kernels();
  for (std::size_t o = 0; o < s.outer; ++o) {
    double* dst = out.data() + o * s.inner;
    for (std::size_t j = 0; j < s.len; ++j) {
      k.add(dst, x.data() + (o * s.len + j) * s.inner, dst, s.inner);
    }
  }
  if (kind == PrimitiveKind::mean_axis) {
    if (s.len == 0) shape_fail(kind, "mean over empty axis");
    k.scale(1.0 / static_cast<double>(s.len), out.data(), out.data(), out.size());
  }
  return Tensor(std::move(out_shape), std::move(out));
}

std::size_t row_width(const Tensor& x) {
  return x.rank() == 0 || x.shape()[0] == 0 ? 0 : x.size() / x.shape()[0];
}

Tensor gather_forward(const Tensor& x, const Attrs& attrs) {
  constexpr auto kind = PrimitiveKind::gather_rows;
  if (x.rank() < 1) shape_fail(kind, "input must have rank >= 1");
  const std::size_t width = row_width(x);
  Shape out_shape = x.shape();
  out_shape[0] = attrs.indices.size();
  std::vector<double> out(attrs.indices.size() * width);
  for (std::size_t r = 0; r < attrs.indices.size(); ++r) {
    const std::size_t src = attrs.indices[r];
    if (src >= x.shape()[0]) shape_fail(kind, "row index " + std::to_string(src) + " out of range");
    std::copy_n(x.data() + src * width, width, out.data() + r * width);
  }
  return Tensor(std::move(out_shape), std::move(out));
}

Tensor masked_select_forward(const Tensor& x, const Attrs& attrs) {
  if (attrs.mask.size() != x.size()) shape_fail(PrimitiveKind::masked_select, "mask size mismatch");
  std::vector<double> out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (attrs.mask[i] != 0) out.push_back(x[i]);
  }
  const std::size_t n = out.size();
  return Tensor(Shape{n}, std::move(out));
}

Tensor scatter_forward(const Tensor& x, const Attrs& attrs) {
  constexpr auto kind = PrimitiveKind::scatter_rows;
  if (x.rank() < 1) shape_fail(kind, "input must have rank >= 1");
  if (attrs.indices.size() != x.shape()[0]) shape_fail(kind, "one index per input row required");
  const std::size_t rows = *attrs.rows;
  const std::size_t width = row_width(x);
  Shape out_shape = x.shape();
  out_shape[0] = rows;
  std::vector<double> out(rows * width, 0.0);
  for (std::size_t r = 0; r < attrs.indices.size(); ++r) {
    const std::size_t dst = attrs.indices[r];
    if (dst >= rows) shape_fail(kind, "row index " + std::to_string(dst) + " out of range");
    kernels().add(out.data() + dst * width, x.data() + r * width, out.data() + dst * width, width);
  }
  return Tensor(std::move(out_shape), std::move(out));
}

void require_inputs(PrimitiveKind kind, std::span<const Tensor> inputs, std::size_t n) {
  if (inputs.size() != n) {
    shape_fail(kind, "expects " + std::to_string(n) + " inputs, got " +
                         std::to_string(inputs.size()));
  }
}

// ---------------------------------------------------------------------------
// VJP helpers

void accumulate(std::vector<double>* grad, const std::vector<double>& contrib) {
  if (grad != nullptr) kernels().add(grad->data(), contrib.data(), grad->data(), contrib.size());
}

}  // namespace

namespace detail {

void validate_attrs(PrimitiveKind kind, const Attrs& attrs) {
  enum : unsigned {
    kAxis = 1u << 0,
    kSlope = 1u << 1,
    kRate = 1u << 2,
    kTraining = 1u << 3,
    kLo = 1u << 4,
    kHi = 1u << 5,
    kEpsilon = 1u << 6,
    kDilation = 1u << 7,
    kRows = 1u << 8,
    kShape = 1u << 9,
    kIndices = 1u << 10,
    kMask = 1u << 11,
    kRng = 1u << 12,
  };
  unsigned set = 0;
  if (attrs.axis) set |= kAxis;
  if (attrs.slope) set |= kSlope;
  if (attrs.rate) set |= kRate;
  if (attrs.training) set |= kTraining;
  if (attrs.lo) set |= kLo;
  if (attrs.hi) set |= kHi;
  if (attrs.epsilon) set |= kEpsilon;
  if (attrs.dilation) set |= kDilation;
  if (attrs.rows) set |= kRows;
  if (attrs.shape) set |= kShape;
  if (!attrs.indices.empty()) set |= kIndices;
  if (!attrs.mask.empty()) set |= kMask;
  if (attrs.rng != nullptr) set |= kRng;

  unsigned allowed = 0;
  unsigned required = 0;
  switch (kind) {
    case PrimitiveKind::causal_conv1d: allowed = kDilation; break;
    case PrimitiveKind::layer_norm: allowed = kEpsilon; break;
    case PrimitiveKind::leaky_relu: required = kSlope; break;
    case PrimitiveKind::softmax_axis: required = kAxis; allowed = kMask; break;
    case PrimitiveKind::dropout: required = kRate | kTraining; allowed = kRng; break;
    case PrimitiveKind::mean_axis:
    case PrimitiveKind::sum_axis: required = kAxis; break;
    case PrimitiveKind::clip: required = kLo | kHi; break;
    // An empty index list is legal for gather (zero rows) and scatter.
    case PrimitiveKind::gather_rows: allowed = kIndices; break;
    case PrimitiveKind::masked_select: allowed = kMask; break;
    case PrimitiveKind::scatter_rows: required = kRows; allowed = kIndices; break;
    case PrimitiveKind::reshape: required = kShape; break;
    default: break;
  }
  allowed |= required;
  if ((set & ~allowed) != 0) {
    throw std::invalid_argument(std::string(kind_name(kind)) + ": unknown attribute supplied");
  }
  if ((set & required) != required) {
    throw std::invalid_argument(std::string(kind_name(kind)) + ": missing required attribute");
  }
}

Tensor forward(PrimitiveKind kind, std::span<const Tensor> in, const Attrs& attrs,
               std::vector<double>& aux) {
  const auto& k = kernels();
  switch (kind) {
    case PrimitiveKind::matmul:
      require_inputs(kind, in, 2);
      return matmul_forward(in[0], in[1]);
    case PrimitiveKind::add:
      require_inputs(kind, in, 2);
      return binary_forward(kind, in[0], in[1], k.add, [](double a, double b) { return a + b; });
    case PrimitiveKind::sub:
      require_inputs(kind, in, 2);
      return binary_forward(kind, in[0], in[1], k.sub, [](double a, double b) { return a - b; });
    case PrimitiveKind::mul:
      require_inputs(kind, in, 2);
      return binary_forward(kind, in[0], in[1], k.mul, [](double a, double b) { return a * b; });
    case PrimitiveKind::div:
      require_inputs(kind, in, 2);
      return binary_forward(kind, in[0], in[1], nullptr, [](double a, double b) { return a / b; });
    case PrimitiveKind::concat_last:
      return concat_forward(in);
    case PrimitiveKind::causal_conv1d:
      require_inputs(kind, in, 3);
      return conv_forward(in[0], in[1], in[2], attrs.dilation.value_or(1));
    case PrimitiveKind::layer_norm:
      require_inputs(kind, in, 3);
      return layer_norm_forward(in[0], in[1], in[2], attrs.epsilon.value_or(1e-5), aux);
    case PrimitiveKind::leaky_relu: {
      require_inputs(kind, in, 1);
      const double slope = *attrs.slope;
      return unary_forward(in[0], [slope](double v) { return v > 0.0 ? v : slope * v; });
    }
    case PrimitiveKind::relu:
      require_inputs(kind, in, 1);
      return unary_forward(in[0], [](double v) { return v > 0.0 ? v : 0.0; });
    case PrimitiveKind::sigmoid:
      require_inputs(kind, in, 1);
      return unary_forward(in[0], [](double v) {
        // Split by sign so exp never overflows.
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      });
    case PrimitiveKind::tanh:
      require_inputs(kind, in, 1);
      return unary_forward(in[0], [](double v) { return std::tanh(v); });
    case PrimitiveKind::softmax_axis:
      require_inputs(kind, in, 1);
      return softmax_forward(in[0], attrs);
    case PrimitiveKind::dropout:
      require_inputs(kind, in, 1);
      return dropout_forward(in[0], attrs, aux);
    case PrimitiveKind::mean_axis:
    case PrimitiveKind::sum_axis:
      require_inputs(kind, in, 1);
      return reduce_forward(kind, in[0], *attrs.axis);
    case PrimitiveKind::clip: {
      require_inputs(kind, in, 1);
      const double lo = *attrs.lo;
      const double hi = *attrs.hi;
      if (lo > hi) throw std::invalid_argument("clip: lo > hi");
      return unary_forward(in[0], [lo, hi](double v) { return std::clamp(v, lo, hi); });
    }
    case PrimitiveKind::sqrt:
      require_inputs(kind, in, 1);
      return unary_forward(in[0], [](double v) { return std::sqrt(v); });
    case PrimitiveKind::gather_rows:
      require_inputs(kind, in, 1);
      return gather_forward(in[0], attrs);
    case PrimitiveKind::masked_select:
      require_inputs(kind, in, 1);
      return masked_select_forward(in[0], attrs);
    case PrimitiveKind::scatter_rows:
      require_inputs(kind, in, 1);
      return scatter_forward(in[0], attrs);
    case PrimitiveKind::reshape: {
      require_inputs(kind, in, 1);
      if (shape_size(*attrs.shape) != in[0].size()) {
        shape_fail(kind, shape_string(in[0].shape()) + " -> " + shape_string(*attrs.shape));
      }
      return Tensor(*attrs.shape, std::vector<double>(in[0].values().begin(), in[0].values().end()));
    }
  }
  throw std::invalid_argument("unknown primitive kind");
}

void vjp(const Tape::Node& node, std::span<const double> g,
         std::span<std::vector<double>*> grads) {
  const auto& k = kernels();
  const auto& in = node.saved;
  const Tensor& out = node.output;
  const std::size_t n_out = out.size();

  switch (node.kind) {
    case PrimitiveKind::matmul: {
      const Tensor& a = in[0];
      const Tensor& b = in[1];
      const std::size_t kk = b.shape()[0];
      const std::size_t m = b.shape()[1];
      const std::size_t rows = a.size() / std::max<std::size_t>(kk, 1);
      if (grads[0] != nullptr) k.gemm_nt(rows, kk, m, g.data(), b.data(), grads[0]->data());
      if (grads[1] != nullptr) k.gemm_tn(kk, m, rows, a.data(), g.data(), grads[1]->data());
      return;
    }
    case PrimitiveKind::add:
    case PrimitiveKind::sub:
    case PrimitiveKind::mul:
    case PrimitiveKind::div: {
      const BroadcastPlan plan = plan_broadcast(node.kind, in[0].shape(), in[1].shape());
      std::vector<double> contrib(g.begin(), g.end());
      if (node.kind == PrimitiveKind::add || node.kind == PrimitiveKind::sub) {
        if (grads[0] != nullptr) reduce_into(plan, 0, contrib, *grads[0]);
        if (grads[1] != nullptr) {
          if (node.kind == PrimitiveKind::sub) k.scale(-1.0, contrib.data(), contrib.data(), n_out);
          reduce_into(plan, 1, contrib, *grads[1]);
        }
        return;
      }
      if (node.kind == PrimitiveKind::mul) {
        if (grads[0] != nullptr) {
          const std::vector<double> eb = expand(plan, 1, in[1]);
          k.mul(g.data(), eb.data(), contrib.data(), n_out);
          reduce_into(plan, 0, contrib, *grads[0]);
        }
        if (grads[1] != nullptr) {
          const std::vector<double> ea = expand(plan, 0, in[0]);
          k.mul(g.data(), ea.data(), contrib.data(), n_out);
          reduce_into(plan, 1, contrib, *grads[1]);
        }
        return;
      }
      const std::vector<double> eb = expand(plan, 1, in[1]);
      if (grads[0] != nullptr) {
        for (std::size_t i = 0; i < n_out; ++i) contrib[i] = g[i] / eb[i];
        reduce_into(plan, 0, contrib, *grads[0]);
      }
      if (grads[1] != nullptr) {
        // d(a/b)/db = -out / b
        for (std::size_t i = 0; i < n_out; ++i) contrib[i] = -g[i] * out[i] / eb[i];
        reduce_into(plan, 1, contrib, *grads[1]);
      }
      return;
    }
    case PrimitiveKind::concat_last: {
      const std::size_t total_last = out.shape().back();
      const std::size_t rows = total_last == 0 ? 0 : n_out / total_last;
      std::size_t col = 0;
      for (std::size_t p = 0; p < in.size(); ++p) {
        const std::size_t w = in[p].shape().back();
        if (grads[p] != nullptr) {
          for (std::size_t r = 0; r < rows; ++r) {
            k.add(grads[p]->data() + r * w, g.data() + r * total_last + col,
                  grads[p]->data() + r * w, w);
          }
        }
        col += w;
      }
      return;
    }
    case PrimitiveKind::causal_conv1d: {
      const Tensor& x = in[0];
      const Tensor& w = in[1];
      const std::size_t t_len = x.shape()[0];
      const std::size_t batch = x.shape()[1];
      const std::size_t cin = x.shape()[2];
      const std::size_t ksize = w.shape()[0];
      const std::size_t cout = w.shape()[2];
      const std::size_t dilation = node.attrs.dilation.value_or(1);
      for (std::size_t kk = 0; kk < ksize; ++kk) {
        const std::size_t shift = (ksize - 1 - kk) * dilation;
        if (shift >= t_len) continue;
        const std::size_t rows = (t_len - shift) * batch;
        const double* gs = g.data() + shift * batch * cout;
        if (grads[0] != nullptr) {
          k.gemm_nt(rows, cin, cout, gs, w.data() + kk * cin * cout, grads[0]->data());
        }
        if (grads[1] != nullptr) {
          k.gemm_tn(cin, cout, rows, x.data(), gs, grads[1]->data() + kk * cin * cout);
        }
      }
      if (grads[2] != nullptr) {
        for (std::size_t r = 0; r < t_len * batch; ++r) {
          k.add(grads[2]->data(), g.data() + r * cout, grads[2]->data(), cout);
        }
      }
      return;
    }
    case PrimitiveKind::layer_norm: {
      const Tensor& x = in[0];
      const Tensor& gamma = in[1];
      const std::size_t d = x.shape().back();
      const std::size_t rows = d == 0 ? 0 : x.size() / d;
      const double inv_d = 1.0 / static_cast<double>(d);
      std::vector<double> xhat(d);
      std::vector<double> gh(d);
      for (std::size_t r = 0; r < rows; ++r) {
        const double mean = node.aux[2 * r];
        const double rstd = node.aux[2 * r + 1];
        const double* xr = x.data() + r * d;
        const double* gr = g.data() + r * d;
        double sum_gh = 0.0;
        double sum_gh_xhat = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          xhat[j] = (xr[j] - mean) * rstd;
          gh[j] = gr[j] * gamma[j];
          sum_gh += gh[j];
          sum_gh_xhat += gh[j] * xhat[j];
        }
        if (grads[0] != nullptr) {
          double* dx = grads[0]->data() + r * d;
          for (std::size_t j = 0; j < d; ++j) {
            dx[j] += rstd * (gh[j] - inv_d * sum_gh - xhat[j] * inv_d * sum_gh_xhat);
          }
        }
        if (grads[1] != nullptr) {
          for (std::size_t j = 0; j < d; ++j) (*grads[1])[j] += gr[j] * xhat[j];
        }
        if (grads[2] != nullptr) k.add(grads[2]->data(), gr, grads[2]->data(), d);
      }
      return;
    }
    case PrimitiveKind::leaky_relu:
    case PrimitiveKind::relu:
    case PrimitiveKind::sigmoid:
    case PrimitiveKind::tanh:
    case PrimitiveKind::clip:
    case PrimitiveKind::sqrt: {
      if (grads[0] == nullptr) return;
      double* dx = grads[0]->data();
      const double* x = in[0].data();
      const double* y = out.data();
      switch (node.kind) {
        case PrimitiveKind::leaky_relu: {
          const double slope = *node.attrs.slope;
          for (std::size_t i = 0; i < n_out; ++i) dx[i] += x[i] > 0.0 ? g[i] : slope * g[i];
          break;
        }
        case PrimitiveKind::relu:
          for (std::size_t i = 0; i < n_out; ++i) dx[i] += x[i] > 0.0 ? g[i] : 0.0;
          break;
        case PrimitiveKind::sigmoid:
          for (std::size_t i = 0; i < n_out; ++i) dx[i] += g[i] * y[i] * (1.0 - y[i]);
          break;
        case PrimitiveKind::tanh:
          for (std::size_t i = 0; i < n_out; ++i) dx[i] += g[i] * (1.0 - y[i] * y[i]);
          break;
        case PrimitiveKind::clip: {
          const double lo = *node.attrs.lo;
          const double hi = *node.attrs.hi;
          for (std::size_t i = 0; i < n_out; ++i) dx[i] += (x[i] > lo && x[i] < hi) ? g[i] : 0.0;
          break;
        }
        default:  // sqrt
          for (std::size_t i = 0; i < n_out; ++i) dx[i] += g[i] * 0.5 / y[i];
          break;
      }
      return;
    }
    case PrimitiveKind::softmax_axis: {
      if (grads[0] == nullptr) return;
      const std::size_t axis = normalize_axis(node.kind, *node.attrs.axis, out.rank());
      const AxisSplit s = split_at(out.shape(), axis);
      double* dx = grads[0]->data();
      for (std::size_t o = 0; o < s.outer; ++o) {
        for (std::size_t i = 0; i < s.inner; ++i) {
          const std::size_t base = o * s.len * s.inner + i;
          double dot = 0.0;
          for (std::size_t j = 0; j < s.len; ++j) {
            const std::size_t at = base + j * s.inner;
            dot += out[at] * g[at];
          }
          for (std::size_t j = 0; j < s.len; ++j) {
            const std::size_t at = base + j * s.inner;
            dx[at] += out[at] * (g[at] - dot);
          }
        }
      }
      return;
    }
    case PrimitiveKind::dropout: {
      if (grads[0] == nullptr) return;
      std::vector<double> contrib(n_out);
      k.mul(g.data(), node.aux.data(), contrib.data(), n_out);
      accumulate(grads[0], contrib);
      return;
    }
    case PrimitiveKind::mean_axis:
    case PrimitiveKind::sum_axis: {
      if (grads[0] == nullptr) return;
      const std::size_t axis = normalize_axis(node.kind, *node.attrs.axis, in[0].rank());
      const AxisSplit s = split_at(in[0].shape(), axis);
      const double factor =
          node.kind == PrimitiveKind::mean_axis ? 1.0 / static_cast<double>(s.len) : 1.0;
      double* dx = grads[0]->data();
      for (std::size_t o = 0; o < s.outer; ++o) {
        for (std::size_t j = 0; j < s.len; ++j) {
          k.axpy(factor, g.data() + o * s.inner, dx + (o * s.len + j) * s.inner, s.inner);
        }
      }
      return;
    }
    case PrimitiveKind::gather_rows: {
      if (grads[0] == nullptr) return;
      const std::size_t width = row_width(in[0]);
      double* dx = grads[0]->data();
      for (std::size_t r = 0; r < node.attrs.indices.size(); ++r) {
        const std::size_t src = node.attrs.indices[r];
        k.add(dx + src * width, g.data() + r * width, dx + src * width, width);
      }
      return;
    }
    case PrimitiveKind::masked_select: {
      if (grads[0] == nullptr) return;
      std::size_t pos = 0;
      for (std::size_t i = 0; i < in[0].size(); ++i) {
        if (node.attrs.mask[i] != 0) (*grads[0])[i] += g[pos++];
      }
      return;
    }
    case PrimitiveKind::scatter_rows: {
      if (grads[0] == nullptr) return;
      const std::size_t width = row_width(in[0]);
      double* dx = grads[0]->data();
      for (std::size_t r = 0; r < node.attrs.indices.size(); ++r) {
        const std::size_t dst = node.attrs.indices[r];
        k.add(dx + r * width, g.data() + dst * width, dx + r * width, width);
      }
      return;
    }
    case PrimitiveKind::reshape: {
      if (grads[0] == nullptr) return;
      k.add(grads[0]->data(), g.data(), grads[0]->data(), n_out);
      return;
    }
  }
}

}  // namespace detail

Tensor apply_primitive(PrimitiveKind kind, std::span<const Tensor> inputs, const Attrs& attrs) {
  detail::validate_attrs(kind, attrs);
  std::vector<double> aux;
  Tensor out = detail::forward(kind, inputs, attrs, aux);
  if (!out.all_finite()) {
    throw NumericError(std::string(kind_name(kind)) + ": non-finite output");
  }
  Tape* tape = Tape::active();
  if (tape == nullptr) return out;
  const bool tracked = std::any_of(inputs.begin(), inputs.end(),
                                   [tape](const Tensor& t) { return tape->owns(t); });
  if (!tracked) return out;
  return tape->record(kind, inputs, attrs, std::move(out), std::move(aux));
}

namespace ops {

namespace {

Tensor apply1(PrimitiveKind kind, const Tensor& x, const Attrs& attrs = {}) {
  return apply_primitive(kind, std::span<const Tensor>(&x, 1), attrs);
}

Tensor apply2(PrimitiveKind kind, const Tensor& a, const Tensor& b) {
  const Tensor in[2] = {a, b};
  return apply_primitive(kind, in);
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) { return apply2(PrimitiveKind::matmul, a, b); }
Tensor add(const Tensor& a, const Tensor& b) { return apply2(PrimitiveKind::add, a, b); }
Tensor sub(const Tensor& a, const Tensor& b) { return apply2(PrimitiveKind::sub, a, b); }
Tensor mul(const Tensor& a, const Tensor& b) { return apply2(PrimitiveKind::mul, a, b); }
Tensor div(const Tensor& a, const Tensor& b) { return apply2(PrimitiveKind::div, a, b); }

Tensor concat_last(std::span<const Tensor> parts) {
  return apply_primitive(PrimitiveKind::concat_last, parts);
}

Tensor concat_last(std::initializer_list<Tensor> parts) {
  return apply_primitive(PrimitiveKind::concat_last,
                         std::span<const Tensor>(parts.begin(), parts.size()));
}

Tensor causal_conv1d(const Tensor& x, const Tensor& w, const Tensor& bias, std::size_t dilation) {
  const Tensor in[3] = {x, w, bias};
  Attrs attrs;
  if (dilation != 1) attrs.dilation = dilation;
  return apply_primitive(PrimitiveKind::causal_conv1d, in, attrs);
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double epsilon) {
  const Tensor in[3] = {x, gamma, beta};
  Attrs attrs;
  attrs.epsilon = epsilon;
  return apply_primitive(PrimitiveKind::layer_norm, in, attrs);
}

Tensor leaky_relu(const Tensor& x, double slope) {
  Attrs attrs;
  attrs.slope = slope;
  return apply1(PrimitiveKind::leaky_relu, x, attrs);
}

Tensor relu(const Tensor& x) { return apply1(PrimitiveKind::relu, x); }
Tensor sigmoid(const Tensor& x) { return apply1(PrimitiveKind::sigmoid, x); }
Tensor tanh(const Tensor& x) { return apply1(PrimitiveKind::tanh, x); }

Tensor softmax(const Tensor& x, int axis, std::vector<std::uint8_t> mask) {
  Attrs attrs;
  attrs.axis = axis;
  attrs.mask = std::move(mask);
  return apply1(PrimitiveKind::softmax_axis, x, attrs);
}

Tensor dropout(const Tensor& x, double rate, bool training, std::mt19937_64& rng) {
  Attrs attrs;
  attrs.rate = rate;
  attrs.training = training;
  attrs.rng = &rng;
  return apply1(PrimitiveKind::dropout, x, attrs);
}

Tensor mean_axis(const Tensor& x, int axis) {
  Attrs attrs;
  attrs.axis = axis;
  return apply1(PrimitiveKind::mean_axis, x, attrs);
}

Tensor sum_axis(const Tensor& x, int axis) {
  Attrs attrs;
  attrs.axis = axis;
  return apply1(PrimitiveKind::sum_axis, x, attrs);
}

Tensor sum_all(const Tensor& x) {
  const Tensor flat = x.rank() == 1 ? x : reshape(x, Shape{x.size()});
  return sum_axis(flat, 0);
}

Tensor clip(const Tensor& x, double lo, double hi) {
  Attrs attrs;
  attrs.lo = lo;
  attrs.hi = hi;
  return apply1(PrimitiveKind::clip, x, attrs);
}

Tensor sqrt(const Tensor& x) { return apply1(PrimitiveKind::sqrt, x); }

Tensor gather_rows(const Tensor& x, std::vector<std::size_t> indices) {
  Attrs attrs;
  attrs.indices = std::move(indices);
  return apply1(PrimitiveKind::gather_rows, x, attrs);
}

Tensor masked_select(const Tensor& x, std::vector<std::uint8_t> mask) {
  Attrs attrs;
  attrs.mask = std::move(mask);
  return apply1(PrimitiveKind::masked_select, x, attrs);
}

Tensor scatter_rows(const Tensor& x, std::vector<std::size_t> indices, std::size_t rows) {
  Attrs attrs;
  attrs.indices = std::move(indices);
  attrs.rows = rows;
  return apply1(PrimitiveKind::scatter_rows, x, attrs);
}

Tensor reshape(const Tensor& x, Shape shape) {
  Attrs attrs;
  attrs.shape = std::move(shape);
  return apply1(PrimitiveKind::reshape, x, attrs);
}

}  // namespace ops
}  // namespace act
