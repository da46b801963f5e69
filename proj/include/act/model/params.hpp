#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "act/model/config.hpp"
#include "act/tensor/tape.hpp"
#include "act/tensor/tensor.hpp"

namespace act {

// Named parameter tensors in a fixed order.
class Params {
 public:
  void add(std::string name, Tensor value);
  const Tensor& at(std::string_view name) const;
  void set(std::string_view name, Tensor value);  // shape must match
  bool contains(std::string_view name) const { return values_.find(name) != values_.end(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  std::size_t scalar_count() const;

  // Copy whose tensors are leaves on `tape`.
  Params watched(Tape& tape) const;
  Params detached() const;

 private:
  std::vector<std::string> names_;
  std::map<std::string, Tensor, std::less<>> values_;
};

enum class Init { glorot, zeros, ones };

struct ParamSpec {
  std::string name;
  Shape shape;
  Init init;
};

// Every parameter the configuration (including its ablations) uses, grouped
// by submodule prefix: pspe., fci., sci., acf.
std::vector<ParamSpec> param_layout(const ActConfig& cfg);
std::size_t parameter_count(const ActConfig& cfg);

// Glorot-uniform weights, zero biases, unit layer-norm gains.
Params init_params(const ActConfig& cfg, std::uint64_t seed);

}  // namespace act
