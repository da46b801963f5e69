#include "act/model/params.hpp"

#include <cmath>
#include <random>

#include "act/error.hpp"

namespace act {

void Params::add(std::string name, Tensor value) {
  if (values_.count(name) != 0) throw ConfigError("duplicate parameter " + name);
  names_.push_back(name);
  values_.emplace(std::move(name), std::move(value));
}

const Tensor& Params::at(std::string_view name) const {
  const auto it = values_.find(name);
  if (it == values_.end()) throw ConfigError("unknown parameter " + std::string(name));
  return it->second;
}

void Params::set(std::string_view name, Tensor value) {
  const auto it = values_.find(name);
  if (it == values_.end()) throw ConfigError("unknown parameter " + std::string(name));
  if (it->second.shape() != value.shape()) {
    throw ShapeError("parameter " + std::string(name) + " expects " + shape_string(it->second.shape()) +
                     ", got " + shape_string(value.shape()));
  }
  it->second = std::move(value);
}

std::size_t Params::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : values_) n += t.size();
  return n;
}

Params Params::watched(Tape& tape) const {
  Params out;
  for (const auto& name : names_) out.add(name, tape.watch(values_.find(name)->second));
  return out;
}

Params Params::detached() const {
  Params out;
  for (const auto& name : names_) out.add(name, values_.find(name)->second.detach());
  return out;
}

std::vector<ParamSpec> param_layout(const ActConfig& cfg) {
  const std::size_t f = cfg.F;
  const std::size_t d = cfg.d;
  std::vector<ParamSpec> out;
  auto linear = [&](const std::string& prefix, std::size_t in, std::size_t outd, bool bias) {
    out.push_back({prefix + ".w", {in, outd}, Init::glorot});
    if (bias) out.push_back({prefix + ".b", {outd}, Init::zeros});
  };
  auto norm = [&](const std::string& prefix) {
    out.push_back({prefix + ".g", {d}, Init::ones});
    out.push_back({prefix + ".b", {d}, Init::zeros});
  };
  auto gat = [&]() {
    out.push_back({"pspe.gat.w", {d, d}, Init::glorot});
    out.push_back({"pspe.gat.a", {2 * d, 1}, Init::glorot});
    out.push_back({"pspe.gat.w_out", {d, d}, Init::glorot});
  };

  linear("pspe.proj", f, d, true);
  norm("pspe.ln");
  if (cfg.ablation.pspe == PspeMode::full) {
    for (const char* r : {"ind", "reg"}) linear(std::string("pspe.gcn_") + r, d, d, true);
    for (const char* r : {"ind", "reg"}) linear(std::string("pspe.fwd_") + r, d, d, false);
    for (const char* r : {"ind", "reg"}) linear(std::string("pspe.bwd_") + r, d, d, false);
    linear("pspe.static", 2 * d, d, false);
    linear("pspe.dyn", d, d, false);
    gat();
    out.push_back({"pspe.gate.w1", {2 * d, d}, Init::glorot});
    out.push_back({"pspe.gate.b1", {d}, Init::zeros});
    out.push_back({"pspe.gate.w2", {d, d}, Init::glorot});
    out.push_back({"pspe.gate.b2", {d}, Init::zeros});
  } else {
    gat();
  }
  norm("pspe.out_ln");

  linear("fci.proj", f, d, true);
  norm("fci.ln");
  if (cfg.ablation.fci == FciMode::tcn) {
    for (const char* c : {"fci.conv1", "fci.conv2", "fci.conv3"}) {
      out.push_back({std::string(c) + ".w", {cfg.tcn_kernel, d, d}, Init::glorot});
      out.push_back({std::string(c) + ".b", {d}, Init::zeros});
    }
  } else {
    linear("fci.mlp", d, d, true);
  }

  linear("sci.proj", f, d, true);
  norm("sci.ln");
  if (cfg.ablation.sci == SciMode::counterfactual) {
    out.push_back({"sci.w1", {2 * d, d}, Init::glorot});
    out.push_back({"sci.w2", {d, d}, Init::glorot});
  } else {
    linear("sci.mlp", d, d, true);
  }

  out.push_back({"acf.w1", {d, d}, Init::glorot});
  out.push_back({"acf.b1", {d}, Init::zeros});
  out.push_back({"acf.w2", {d, 1}, Init::glorot});
  out.push_back({"acf.w_out", {d, 1}, Init::glorot});
  return out;
}

std::size_t parameter_count(const ActConfig& cfg) {
  std::size_t n = 0;
  for (const auto& p : param_layout(cfg)) n += shape_size(p.shape);
  return n;
}

Params init_params(const ActConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  Params out;
  for (const auto& spec : param_layout(cfg)) {
    std::vector<double> v(shape_size(spec.shape), 0.0);
    if (spec.init == Init::ones) {
      std::fill(v.begin(), v.end(), 1.0);
    } else if (spec.init == Init::glorot) {
      // Leading axes (conv taps) scale both fans.
      std::size_t receptive = 1;
      for (std::size_t a = 0; a + 2 < spec.shape.size(); ++a) receptive *= spec.shape[a];
      const double fan_in = static_cast<double>(receptive * spec.shape[spec.shape.size() - 2]);
      const double fan_out = static_cast<double>(receptive * spec.shape.back());
      const double limit = std::sqrt(6.0 / (fan_in + fan_out));
      for (double& x : v) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        x = (2.0 * u - 1.0) * limit;
      }
    }
    out.add(spec.name, Tensor(spec.shape, std::move(v)));
  }
  return out;
}

}  // namespace act
