#include "act/model/model.hpp"

#include <algorithm>
#include <string>

#include "act/decompose/decompose.hpp"
#include "act/error.hpp"
#include "act/graph/relational.hpp"
#include "act/tensor/ops.hpp"

namespace act {

namespace {

std::string key(std::string_view prefix, std::string_view leaf) {
  std::string k(prefix);
  k += '.';
  k += leaf;
  return k;
}

void check_window(const Tensor& x, const ActConfig& cfg, const char* who) {
  if (x.rank() != 3 || x.shape()[2] != cfg.F || x.shape()[0] == 0) {
    throw ShapeError(std::string(who) + ": expected [T x N x " + std::to_string(cfg.F) + "], got " +
                     shape_string(x.shape()));
  }
}

// Trailing `steps` time slices of a [T x ...] constant.
Tensor tail_steps(const Tensor& x, std::size_t steps) {
  const std::size_t t = x.shape()[0];
  if (steps >= t) return x.detach();
  const std::size_t row = x.size() / t;
  const auto src = x.values().subspan((t - steps) * row);
  Shape shape = x.shape();
  shape[0] = steps;
  return Tensor(shape, std::vector<double>(src.begin(), src.end()));
}

Tensor maybe_dropout(const Tensor& x, const ActConfig& cfg, const ForwardOptions& opt) {
  if (!opt.training || cfg.dropout_rate == 0.0) return x;
  if (opt.rng == nullptr) throw ConfigError("training forward needs a random generator");
  return ops::dropout(x, cfg.dropout_rate, true, *opt.rng);
}

Tensor x0_of(const Tensor& x_trend, const Params& p, const ActConfig& cfg) {
  return project_norm(last_step(x_trend), p, "pspe", cfg);
}

GatParams gat_params(const Params& p) {
  return {p.at("pspe.gat.w"), p.at("pspe.gat.a"), p.at("pspe.gat.w_out")};
}

}  // namespace

Tensor last_step(const Tensor& x) { return ops::reshape(tail_steps(x, 1), {x.shape()[1], x.shape()[2]}); }

Tensor project_norm(const Tensor& x, const Params& p, std::string_view prefix, const ActConfig& cfg) {
  const Tensor proj = ops::add(ops::matmul(x, p.at(key(prefix, "proj.w"))), p.at(key(prefix, "proj.b")));
  return ops::layer_norm(proj, p.at(key(prefix, "ln.g")), p.at(key(prefix, "ln.b")), cfg.ln_epsilon);
}

Tensor pspe_forward(const Tensor& x_trend, const RelationGraphs& graphs, const Params& p,
                    const ActConfig& cfg, PspeDiagnostics* diag) {
  check_window(x_trend, cfg, "pspe_forward");
  if (cfg.ablation.pspe != PspeMode::full) throw ConfigError("pspe_forward needs pspe=full");
  const std::size_t n = x_trend.shape()[1];
  if (graphs.industry.size() != n || graphs.region.size() != n) {
    throw ShapeError("pspe_forward: relation graphs do not match " + std::to_string(n) + " instruments");
  }
  const double slope = cfg.leaky_slope;
  const Tensor x0 = x0_of(x_trend, p, cfg);

  Tensor forward_parts[2];
  Tensor u = x0;
  const Adjacency* relations[2] = {&graphs.industry, &graphs.region};
  const char* names[2] = {"ind", "reg"};
  for (int r = 0; r < 2; ++r) {
    const std::string rel = names[r];
    const Tensor h = ops::leaky_relu(
        gcn_layer(x0, *relations[r], p.at("pspe.gcn_" + rel + ".w"), p.at("pspe.gcn_" + rel + ".b")), slope);
    forward_parts[r] = ops::leaky_relu(ops::matmul(h, p.at("pspe.fwd_" + rel + ".w")), slope);
    u = ops::sub(u, ops::matmul(h, p.at("pspe.bwd_" + rel + ".w")));
  }
  const Tensor z_s = ops::matmul(ops::concat_last({forward_parts[0], forward_parts[1]}), p.at("pspe.static.w"));

  const Tensor u_tilde = ops::leaky_relu(ops::matmul(u, p.at("pspe.dyn.w")), slope);
  const std::size_t k = std::min(cfg.k, n - 1);
  const DynamicGraph dyn = topk_graph(cosine_similarity_matrix(u_tilde), k);
  const Tensor z_d = gat_layer(u_tilde, dyn.adjacency, gat_params(p), slope);

  const Tensor hidden = ops::leaky_relu(
      ops::add(ops::matmul(ops::concat_last({z_s, z_d}), p.at("pspe.gate.w1")), p.at("pspe.gate.b1")), slope);
  const Tensor g = ops::sigmoid(ops::add(ops::matmul(hidden, p.at("pspe.gate.w2")), p.at("pspe.gate.b2")));
  if (diag != nullptr) {
    diag->dynamic_graph = dyn.adjacency;
    double s = 0.0;
    for (double v : g.values()) s += v;
    diag->gate_mean = s / static_cast<double>(g.size());
  }
  return ops::layer_norm(ops::add(z_s, ops::mul(g, z_d)), p.at("pspe.out_ln.g"), p.at("pspe.out_ln.b"),
                         cfg.ln_epsilon);
}

Tensor pspe_ablation_forward(const Tensor& x_trend, const RelationGraphs& graphs, const Params& p,
                             const ActConfig& cfg) {
  check_window(x_trend, cfg, "pspe_ablation_forward");
  const std::size_t n = x_trend.shape()[1];
  if (graphs.industry.size() != n || graphs.region.size() != n) {
    throw ShapeError("pspe_ablation_forward: relation graphs do not match " + std::to_string(n) + " instruments");
  }
  Adjacency merged(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) merged.set(i, j, graphs.industry(i, j) || graphs.region(i, j));
    if (merged.degree(i) == 0) merged.set(i, i, true);
  }
  const Tensor x0 = x0_of(x_trend, p, cfg);
  return ops::layer_norm(gat_layer(x0, merged, gat_params(p), cfg.leaky_slope), p.at("pspe.out_ln.g"),
                         p.at("pspe.out_ln.b"), cfg.ln_epsilon);
}

Tensor fci_forward(const Tensor& x_fluct, const Params& p, const ActConfig& cfg, const ForwardOptions& opt) {
  check_window(x_fluct, cfg, "fci_forward");
  if (cfg.ablation.fci != FciMode::tcn) throw ConfigError("fci_forward needs fci=tcn");
  const std::size_t n = x_fluct.shape()[1];
  // Only the final output is read, and it sees exactly the last tcn_kernel
  // steps; projection and norm act per step, so the tail suffices.
  const Tensor seq = project_norm(tail_steps(x_fluct, cfg.tcn_kernel), p, "fci", cfg);
  const Tensor pc = ops::causal_conv1d(seq, p.at("fci.conv1.w"), p.at("fci.conv1.b"));
  const Tensor qc = ops::sigmoid(ops::causal_conv1d(seq, p.at("fci.conv2.w"), p.at("fci.conv2.b")));
  const Tensor rc = ops::causal_conv1d(seq, p.at("fci.conv3.w"), p.at("fci.conv3.b"));
  const Tensor z = ops::relu(ops::add(ops::mul(pc, qc), rc));
  const std::size_t last = z.shape()[0] - 1;
  const Tensor z_last = ops::reshape(ops::gather_rows(z, {last}), {n, cfg.d});
  return maybe_dropout(z_last, cfg, opt);
}

Tensor sci_forward(const Tensor& x_shock, const Params& p, const ActConfig& cfg, const ForwardOptions& opt) {
  check_window(x_shock, cfg, "sci_forward");
  if (cfg.ablation.sci != SciMode::counterfactual) throw ConfigError("sci_forward needs sci=counterfactual");
  const Tensor smooth = causal_moving_average(tail_steps(x_shock, cfg.w_s), cfg.w_s);
  const Tensor x = project_norm(last_step(x_shock), p, "sci", cfg);
  const Tensor x_cf = project_norm(last_step(smooth), p, "sci", cfg);
  const Tensor h = ops::leaky_relu(ops::matmul(ops::concat_last({x, x_cf}), p.at("sci.w1")), cfg.leaky_slope);
  return ops::matmul(maybe_dropout(h, cfg, opt), p.at("sci.w2"));
}

Tensor mlp_isolation_forward(const Tensor& x_component, const Params& p, std::string_view branch,
                             const ActConfig& cfg) {
  check_window(x_component, cfg, "mlp_isolation_forward");
  const Tensor x = project_norm(last_step(x_component), p, branch, cfg);
  return ops::leaky_relu(ops::add(ops::matmul(x, p.at(key(branch, "mlp.w"))), p.at(key(branch, "mlp.b"))),
                         cfg.leaky_slope);
}

AcfOutput acf_forward(const Tensor& z_trend, const Tensor& z_fluct, const Tensor& z_shock, const Params& p) {
  if (z_trend.shape() != z_fluct.shape() || z_trend.shape() != z_shock.shape() || z_trend.rank() != 2) {
    throw ShapeError("acf_forward: component embeddings must share one [N x d] shape");
  }
  const std::size_t n = z_trend.shape()[0];
  const Tensor* comps[3] = {&z_trend, &z_fluct, &z_shock};
  Tensor scores[3];
  for (int c = 0; c < 3; ++c) {
    const Tensor h = ops::tanh(ops::add(ops::matmul(*comps[c], p.at("acf.w1")), p.at("acf.b1")));
    scores[c] = ops::matmul(h, p.at("acf.w2"));  // [N, 1]
  }
  AcfOutput out;
  const Tensor alpha = ops::softmax(ops::concat_last({scores[0], scores[1], scores[2]}), 1);
  Tensor z;
  for (int c = 0; c < 3; ++c) {
    std::vector<double> pick(3, 0.0);
    pick[c] = 1.0;
    const Tensor weight = ops::matmul(alpha, Tensor(Shape{3, 1}, pick));  // [N, 1]
    const Tensor term = ops::mul(weight, *comps[c]);
    z = c == 0 ? term : ops::add(z, term);
  }
  out.y = ops::reshape(ops::matmul(z, p.at("acf.w_out")), {n});
  out.alpha = alpha;
  return out;
}

ForwardResult act_forward(const Tensor& window, const RelationGraphs& graphs, const Params& p,
                          const ActConfig& cfg, const ForwardOptions& opt) {
  check_window(window, cfg, "act_forward");
  const Decomposition parts = tcd_decompose(window, cfg.tau, cfg.sigma);
  ForwardResult out;
  Tensor z_trend;
  if (cfg.ablation.pspe == PspeMode::full) {
    PspeDiagnostics pd;
    z_trend = pspe_forward(parts.trend, graphs, p, cfg, &pd);
    out.diag.dynamic_graph = std::move(pd.dynamic_graph);
    out.diag.gate_mean = pd.gate_mean;
  } else {
    z_trend = pspe_ablation_forward(parts.trend, graphs, p, cfg);
  }
  const Tensor z_fluct = cfg.ablation.fci == FciMode::tcn ? fci_forward(parts.fluct, p, cfg, opt)
                                                          : mlp_isolation_forward(parts.fluct, p, "fci", cfg);
  const Tensor z_shock = cfg.ablation.sci == SciMode::counterfactual
                             ? sci_forward(parts.shock, p, cfg, opt)
                             : mlp_isolation_forward(parts.shock, p, "sci", cfg);
  AcfOutput fused = acf_forward(z_trend, z_fluct, z_shock, p);
  out.y = std::move(fused.y);
  out.diag.alpha = std::move(fused.alpha);
  return out;
}

}  // namespace act
