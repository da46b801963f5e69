#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "act/tensor/tensor.hpp"

namespace act {

// Closed catalog of differentiable primitives. Each kind has an analytic
// vector-Jacobian product in ops.cpp.
enum class PrimitiveKind : std::uint8_t {
  matmul,
  add,
  sub,
  mul,
  div,
  concat_last,
  causal_conv1d,
  layer_norm,
  leaky_relu,
  relu,
  sigmoid,
  tanh,
  softmax_axis,
  dropout,
  mean_axis,
  sum_axis,
  clip,
  sqrt,
  gather_rows,
  masked_select,
  scatter_rows,
  reshape,
};

std::string_view kind_name(PrimitiveKind kind);

// Per-call attributes. Only the fields a kind accepts may be set; anything else
// is rejected as an unknown attribute.
struct Attrs {
  std::optional<int> axis;
  std::optional<double> slope;
  std::optional<double> rate;
  std::optional<bool> training;
  std::optional<double> lo;
  std::optional<double> hi;
  std::optional<double> epsilon;
  std::optional<std::size_t> dilation;
  std::optional<std::size_t> rows;
  std::optional<Shape> shape;
  std::vector<std::size_t> indices;
  std::vector<std::uint8_t> mask;
  std::mt19937_64* rng = nullptr;
};

// Records primitive applications while active and replays them in reverse to
// accumulate gradients. Single-threaded; at most one tape is active per thread.
class Tape {
 public:
  static constexpr std::uint32_t kNoNode = 0xffffffffu;

  struct Node {
    PrimitiveKind kind{};
    bool leaf = false;
    bool requires_grad = false;
    Attrs attrs;
    std::vector<std::uint32_t> inputs;  // kNoNode for constants
    std::vector<Tensor> saved;          // detached input values
    Tensor output;                      // detached output value
    std::vector<double> aux;            // kind-specific saved state
  };

  Tape();
  ~Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  std::uint64_t id() const noexcept { return id_; }
  std::size_t node_count() const noexcept { return nodes_.size(); }

  // Registers a leaf whose gradient will be collected.
  Tensor watch(const Tensor& value);

  // Reverse sweep from a scalar loss recorded on this tape.
  void backward(const Tensor& loss);

  // Gradient of the last backward() with respect to a tracked tensor; zeros
  // when the tensor did not influence the loss.
  Tensor gradient(const Tensor& tensor) const;

  // Appends a node. Inputs not tracked by this tape are recorded as constants.
  // Returns the output re-tagged with the new node handle.
  Tensor record(PrimitiveKind kind, std::span<const Tensor> inputs, Attrs attrs,
                Tensor output, std::vector<double> aux);

  bool owns(const Tensor& tensor) const noexcept {
    return tensor.tape_id_ == id_ && tensor.node_ < nodes_.size();
  }

  static Tape* active() noexcept;

 private:
  friend class TapeScope;

  std::uint64_t id_;
  std::vector<Node> nodes_;
  std::vector<std::vector<double>> grads_;
};

// Makes a tape active for the lifetime of the scope; restores the previous one.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

}  // namespace act
