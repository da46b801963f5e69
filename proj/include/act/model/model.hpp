#pragma once

#include <random>
#include <string_view>

#include "act/data/panel.hpp"
#include "act/model/config.hpp"
#include "act/model/params.hpp"
#include "act/tensor/tensor.hpp"

namespace act {

struct ForwardOptions {
  bool training = false;           // enables dropout
  std::mt19937_64* rng = nullptr;  // required when training
};

struct PspeDiagnostics {
  Adjacency dynamic_graph;
  double gate_mean = 0.0;
};

struct Diagnostics {
  Tensor alpha;  // [N x 3] component weights (trend, fluct, shock)
  Adjacency dynamic_graph;
  double gate_mean = 0.0;
};

struct ForwardResult {
  Tensor y;  // [N]
  Diagnostics diag;
};

struct AcfOutput {
  Tensor y;      // [N]
  Tensor alpha;  // [N x 3]
};

// Final time slice of a [T x N x F] tensor, as [N x F].
Tensor last_step(const Tensor& x);

// LN(x W + b) with parameters <prefix>.proj and <prefix>.ln.
Tensor project_norm(const Tensor& x, const Params& p, std::string_view prefix, const ActConfig& cfg);

// Purification path on the trend component.
Tensor pspe_forward(const Tensor& x_trend, const RelationGraphs& graphs, const Params& p,
                    const ActConfig& cfg, PspeDiagnostics* diag = nullptr);

// w/o PSPE: LN(GAT(x0, A_ind OR A_reg)); isolated nodes attend to themselves.
Tensor pspe_ablation_forward(const Tensor& x_trend, const RelationGraphs& graphs, const Params& p,
                             const ActConfig& cfg);

// Gated causal convolution over the fluctuation sequence, read at the final step.
Tensor fci_forward(const Tensor& x_fluct, const Params& p, const ActConfig& cfg,
                   const ForwardOptions& opt = {});

// Raw shock versus its trailing mean, fused by a bias-free two-layer MLP.
Tensor sci_forward(const Tensor& x_shock, const Params& p, const ActConfig& cfg,
                   const ForwardOptions& opt = {});

// leaky(W LN(Proj(x_T)) + b) with parameters <branch>.proj/.ln/.mlp.
Tensor mlp_isolation_forward(const Tensor& x_component, const Params& p, std::string_view branch,
                             const ActConfig& cfg);

AcfOutput acf_forward(const Tensor& z_trend, const Tensor& z_fluct, const Tensor& z_shock,
                      const Params& p);

// Decomposes the window, runs the configured branches, and fuses them.
ForwardResult act_forward(const Tensor& window, const RelationGraphs& graphs, const Params& p,
                          const ActConfig& cfg, const ForwardOptions& opt = {});

}  // namespace act
