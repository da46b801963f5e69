#include "act/tensor/tape.hpp"

#include <atomic>

#include "act/error.hpp"
#include "primitives.hpp"

namespace act {

namespace {

std::atomic<std::uint64_t> next_tape_id{1};
thread_local Tape* active_tape = nullptr;

}  // namespace

std::string_view kind_name(PrimitiveKind kind) {
  switch (kind) {
    case PrimitiveKind::matmul: return "matmul";
    case PrimitiveKind::add: return "add";
    case PrimitiveKind::sub: return "sub";
    case PrimitiveKind::mul: return "mul";
    case PrimitiveKind::div: return "div";
    case PrimitiveKind::concat_last: return "concat-last-axis";
    case PrimitiveKind::causal_conv1d: return "causal-conv1d";
    case PrimitiveKind::layer_norm: return "layer-norm";
    case PrimitiveKind::leaky_relu: return "leaky-relu";
    case PrimitiveKind::relu: return "relu";
    case PrimitiveKind::sigmoid: return "sigmoid";
    case PrimitiveKind::tanh: return "tanh";
    case PrimitiveKind::softmax_axis: return "softmax-axis";
    case PrimitiveKind::dropout: return "dropout";
    case PrimitiveKind::mean_axis: return "mean-axis";
    case PrimitiveKind::sum_axis: return "sum-axis";
    case PrimitiveKind::clip: return "clip";
    case PrimitiveKind::sqrt: return "sqrt";
    case PrimitiveKind::gather_rows: return "gather-rows";
    case PrimitiveKind::masked_select: return "masked-select";
    case PrimitiveKind::scatter_rows: return "scatter-rows";
    case PrimitiveKind::reshape: return "reshape";
  }
  return "unknown";
}

Tape::Tape() : id_(next_tape_id.fetch_add(1)) {}

Tape::~Tape() {
  if (active_tape == this) active_tape = nullptr;
}

Tape* Tape::active() noexcept { return active_tape; }

Tensor Tape::watch(const Tensor& value) {
  Node node;
  node.leaf = true;
  node.requires_grad = true;
  node.output = value.detach();
  Tensor out = node.output;
  out.tape_id_ = id_;
  out.node_ = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back(std::move(node));
  return out;
}

Tensor Tape::record(PrimitiveKind kind, std::span<const Tensor> inputs, Attrs attrs,
                    Tensor output, std::vector<double> aux) {
  Node node;
  node.kind = kind;
  attrs.rng = nullptr;
  node.attrs = std::move(attrs);
  node.inputs.reserve(inputs.size());
  node.saved.reserve(inputs.size());
  for (const Tensor& input : inputs) {
    if (owns(input)) {
      node.inputs.push_back(input.node_);
      node.requires_grad = node.requires_grad || nodes_[input.node_].requires_grad;
    } else {
      node.inputs.push_back(kNoNode);
    }
    node.saved.push_back(input.detach());
  }
  node.output = output.detach();
  node.aux = std::move(aux);
  output.tape_id_ = id_;
  output.node_ = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back(std::move(node));
  return output;
}

void Tape::backward(const Tensor& loss) {
  if (!owns(loss)) throw Error("backward: loss is not recorded on this tape");
  if (loss.size() != 1) {
    throw ShapeError("backward: loss must be scalar, got " + shape_string(loss.shape()));
  }
  grads_.assign(nodes_.size(), {});
  grads_[loss.node_] = {1.0};

  std::vector<std::vector<double>*> input_grads;
  for (std::size_t idx = loss.node_ + 1; idx-- > 0;) {
    const Node& node = nodes_[idx];
    if (node.leaf || !node.requires_grad || grads_[idx].empty()) continue;
    input_grads.assign(node.inputs.size(), nullptr);
    bool any = false;
    for (std::size_t k = 0; k < node.inputs.size(); ++k) {
      const std::uint32_t src = node.inputs[k];
      if (src == kNoNode || !nodes_[src].requires_grad) continue;
      if (grads_[src].empty()) grads_[src].assign(nodes_[src].output.size(), 0.0);
      input_grads[k] = &grads_[src];
      any = true;
    }
    if (any) detail::vjp(node, grads_[idx], input_grads);
  }
}

Tensor Tape::gradient(const Tensor& tensor) const {
  if (!owns(tensor)) throw Error("gradient: tensor is not recorded on this tape");
  const auto& g = tensor.node_ < grads_.size() ? grads_[tensor.node_] : std::vector<double>{};
  if (g.empty()) return Tensor(tensor.shape());
  return Tensor(tensor.shape(), g);
}

TapeScope::TapeScope(Tape& tape) : previous_(active_tape) { active_tape = &tape; }

TapeScope::~TapeScope() { active_tape = previous_; }

}  // namespace act
