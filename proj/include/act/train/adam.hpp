#pragma once

#include <map>
#include <string>
#include <vector>

#include "act/model/params.hpp"

namespace act {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  // grads[name] must match the parameter shape; missing names are skipped.
  void step(Params& params, const std::map<std::string, std::vector<double>>& grads);
  std::size_t steps() const noexcept { return t_; }

 private:
  AdamConfig cfg_;
  std::size_t t_ = 0;
  std::map<std::string, std::vector<double>> m_, v_;
};

}  // namespace act
