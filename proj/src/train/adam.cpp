#include "act/train/adam.hpp"

#include <cmath>

#include "act/error.hpp"

namespace act {

void Adam::step(Params& params, const std::map<std::string, std::vector<double>>& grads) {
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (const auto& name : params.names()) {
    const auto g = grads.find(name);
    if (g == grads.end()) continue;
    const Tensor& cur = params.at(name);
    if (g->second.size() != cur.size()) throw ShapeError("adam: gradient size mismatch for " + name);
    auto& m = m_[name];
    auto& v = v_[name];
    m.resize(cur.size(), 0.0);
    v.resize(cur.size(), 0.0);
    std::vector<double> next(cur.values().begin(), cur.values().end());
    for (std::size_t i = 0; i < next.size(); ++i) {
      const double gi = g->second[i];
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * gi;
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * gi * gi;
      next[i] -= cfg_.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg_.epsilon);
    }
    params.set(name, Tensor(cur.shape(), std::move(next)));
  }
}

}  // namespace act
