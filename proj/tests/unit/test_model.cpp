#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "act/decompose/decompose.hpp"
#include "act/error.hpp"
#include "act/model/checkpoint.hpp"
#include "act/model/model.hpp"
#include "act/tensor/gradcheck.hpp"
#include "act/tensor/ops.hpp"
#include "act/train/loss.hpp"
#include "support.hpp"

using act::Tensor;
using namespace testing_support;

namespace {

act::ActConfig toy_config() {
  act::ActConfig cfg;
  cfg.F = 4;
  cfg.T = 12;
  cfg.d = 6;
  cfg.tau = 6;
  cfg.sigma = 3;
  cfg.w_s = 4;
  cfg.k = 3;
  return cfg;
}

act::RelationGraphs toy_graphs(std::size_t n) {
  act::RelationGraphs g;
  for (std::size_t i = 0; i < n; ++i) g.instruments.push_back("S" + std::to_string(i));
  g.industry = block_adjacency(n, 3);
  g.region = act::Adjacency(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) g.region.set(i, j, i != j && i % 2 == j % 2);
  return g;
}

oracle::ModelShape shape_of(const act::ActConfig& c) {
  return {c.tau, c.sigma, c.w_s, c.k, c.tcn_kernel, c.leaky_slope, c.ln_epsilon};
}

struct Fixture {
  act::ActConfig cfg = toy_config();
  act::RelationGraphs graphs = toy_graphs(7);
  act::Params params;
  Tensor window;
  Fixture() {
    std::mt19937_64 rng(11);
    params = randomized(act::init_params(cfg, 3), rng, 0.3);
    window = random_tensor({cfg.T, 7, cfg.F}, rng);
  }
};

}  // namespace

TEST(Params, LayoutMatchesInit) {
  const auto cfg = toy_config();
  const auto p = act::init_params(cfg, 1);
  const auto layout = act::param_layout(cfg);
  ASSERT_EQ(p.names().size(), layout.size());
  std::size_t total = 0;
  for (const auto& s : layout) {
    EXPECT_EQ(p.at(s.name).shape(), s.shape) << s.name;
    total += act::shape_size(s.shape);
  }
  EXPECT_EQ(total, act::parameter_count(cfg));
  EXPECT_EQ(p.scalar_count(), total);
  EXPECT_EQ(p.at("pspe.static.w").shape(), (act::Shape{12, 6}));
  EXPECT_EQ(p.at("fci.conv1.w").shape(), (act::Shape{3, 6, 6}));
  EXPECT_EQ(p.at("sci.w1").shape(), (act::Shape{12, 6}));
}

TEST(Params, InitIsSeededAndBounded) {
  const auto cfg = toy_config();
  const auto a = act::init_params(cfg, 5), b = act::init_params(cfg, 5), c = act::init_params(cfg, 6);
  EXPECT_EQ(a.at("acf.w1").values()[0], b.at("acf.w1").values()[0]);
  EXPECT_NE(a.at("acf.w1").values()[0], c.at("acf.w1").values()[0]);
  // Glorot bound sqrt(6 / (fan_in + fan_out)) = 1 for a 6 x 6 matrix.
  for (double v : a.at("acf.w1").values()) EXPECT_LE(std::abs(v), 1.0);
  for (double v : a.at("pspe.ln.g").values()) EXPECT_EQ(v, 1.0);
  for (double v : a.at("pspe.proj.b").values()) EXPECT_EQ(v, 0.0);
}

TEST(Params, AblationLayoutsDiffer) {
  auto cfg = toy_config();
  cfg.ablation = act::ablation_preset("wo_pspe");
  const auto p = act::init_params(cfg, 1);
  EXPECT_FALSE(p.contains("pspe.gcn_ind.w"));
  EXPECT_TRUE(p.contains("pspe.gat.w"));
  cfg.ablation = act::ablation_preset("wo_fci");
  EXPECT_TRUE(act::init_params(cfg, 1).contains("fci.mlp.w"));
  cfg.ablation = act::ablation_preset("wo_sci");
  EXPECT_TRUE(act::init_params(cfg, 1).contains("sci.mlp.w"));
  EXPECT_THROW(act::ablation_preset("wo_everything"), act::ConfigError);
}

TEST(Modules, PspeMatchesOracle) {
  Fixture f;
  const auto parts = act::tcd_decompose(f.window, f.cfg.tau, f.cfg.sigma);
  act::PspeDiagnostics diag;
  const Tensor z = act::pspe_forward(parts.trend, f.graphs, f.params, f.cfg, &diag);
  const auto o = oracle::pspe(to_seq(parts.trend), f.graphs.industry.cells(), f.graphs.region.cells(),
                              to_weights(f.params), f.cfg.k, f.cfg.leaky_slope, f.cfg.ln_epsilon);
  EXPECT_LT(max_abs_diff(z, o), 1e-9);
  EXPECT_GT(diag.gate_mean, 0.0);
  EXPECT_LT(diag.gate_mean, 1.0);
  for (std::size_t i = 0; i < 7; ++i) EXPECT_EQ(diag.dynamic_graph.degree(i), f.cfg.k);
}

TEST(Modules, FciMatchesFullLengthOracle) {
  Fixture f;
  const auto parts = act::tcd_decompose(f.window, f.cfg.tau, f.cfg.sigma);
  const Tensor z = act::fci_forward(parts.fluct, f.params, f.cfg);
  const auto o = oracle::fci(to_seq(parts.fluct), to_weights(f.params), f.cfg.tcn_kernel, f.cfg.leaky_slope,
                             f.cfg.ln_epsilon);
  EXPECT_EQ(z.shape(), (act::Shape{7, 6}));
  EXPECT_LT(max_abs_diff(z, o), 1e-9);
}

TEST(Modules, SciMatchesOracle) {
  Fixture f;
  const auto parts = act::tcd_decompose(f.window, f.cfg.tau, f.cfg.sigma);
  const Tensor z = act::sci_forward(parts.shock, f.params, f.cfg);
  const auto o = oracle::sci(to_seq(parts.shock), to_weights(f.params), f.cfg.w_s, f.cfg.leaky_slope,
                             f.cfg.ln_epsilon);
  EXPECT_LT(max_abs_diff(z, o), 1e-9);
}

TEST(Modules, AcfMatchesOracle) {
  Fixture f;
  std::mt19937_64 rng(8);
  const Tensor a = random_tensor({7, 6}, rng), b = random_tensor({7, 6}, rng), c = random_tensor({7, 6}, rng);
  const auto out = act::acf_forward(a, b, c, f.params);
  const auto o = oracle::acf(to_mat(a), to_mat(b), to_mat(c), to_weights(f.params));
  EXPECT_LT(max_abs_diff(std::vector<double>(out.y.values().begin(), out.y.values().end()), o.y), 1e-9);
  EXPECT_LT(max_abs_diff(out.alpha, o.alpha), 1e-9);
  for (std::size_t i = 0; i < 7; ++i)
    EXPECT_NEAR(out.alpha.at({i, 0}) + out.alpha.at({i, 1}) + out.alpha.at({i, 2}), 1.0, 1e-14);
}

TEST(Modules, ActForwardMatchesComposedOracle) {
  Fixture f;
  const auto r = act::act_forward(f.window, f.graphs, f.params, f.cfg);
  const auto o = oracle::full_model(to_seq(f.window), f.graphs.industry.cells(), f.graphs.region.cells(),
                                    to_weights(f.params), shape_of(f.cfg));
  EXPECT_LT(max_abs_diff(std::vector<double>(r.y.values().begin(), r.y.values().end()), o.y), 1e-9);
  EXPECT_EQ(r.diag.alpha.shape(), (act::Shape{7, 3}));
}

TEST(Modules, AblationsRunAndDiffer) {
  Fixture f;
  const auto full = act::act_forward(f.window, f.graphs, f.params, f.cfg).y;
  for (const char* name : {"wo_pspe", "wo_fci", "wo_sci"}) {
    auto cfg = f.cfg;
    cfg.ablation = act::ablation_preset(name);
    std::mt19937_64 rng(2);
    const auto p = randomized(act::init_params(cfg, 3), rng, 0.3);
    const auto y = act::act_forward(f.window, f.graphs, p, cfg).y;
    EXPECT_EQ(y.shape(), full.shape()) << name;
    EXPECT_TRUE(y.all_finite()) << name;
  }
}

TEST(Modules, WoPspeToleratesIsolatedNodes) {
  Fixture f;
  auto cfg = f.cfg;
  cfg.ablation = act::ablation_preset("wo_pspe");
  act::RelationGraphs g = f.graphs;
  g.industry = act::Adjacency(7);
  g.region = act::Adjacency(7);
  const auto p = act::init_params(cfg, 1);
  EXPECT_NO_THROW(act::act_forward(f.window, g, p, cfg));
}

TEST(Modules, KClampedToUniverse) {
  Fixture f;
  auto cfg = f.cfg;
  cfg.k = 50;
  EXPECT_NO_THROW(act::act_forward(f.window, f.graphs, f.params, cfg));
}

TEST(Modules, RejectsWrongShapes) {
  Fixture f;
  std::mt19937_64 rng(1);
  EXPECT_THROW(act::act_forward(random_tensor({12, 7, 5}, rng), f.graphs, f.params, f.cfg), act::ShapeError);
  EXPECT_THROW(act::act_forward(random_tensor({12, 6, 4}, rng), f.graphs, f.params, f.cfg), act::ShapeError);
}

TEST(Modules, DropoutOnlyInTraining) {
  Fixture f;
  const auto a = act::act_forward(f.window, f.graphs, f.params, f.cfg).y;
  const auto b = act::act_forward(f.window, f.graphs, f.params, f.cfg).y;
  EXPECT_EQ(max_abs_diff(std::vector<double>(a.values().begin(), a.values().end()),
                         std::vector<double>(b.values().begin(), b.values().end())),
            0.0);
  std::mt19937_64 rng(5);
  const auto t = act::act_forward(f.window, f.graphs, f.params, f.cfg, {true, &rng}).y;
  EXPECT_GT(max_abs_diff(std::vector<double>(a.values().begin(), a.values().end()),
                         std::vector<double>(t.values().begin(), t.values().end())),
            0.0);
  EXPECT_THROW(act::act_forward(f.window, f.graphs, f.params, f.cfg, {true, nullptr}), act::ConfigError);
}

TEST(Modules, EndToEndGradient) {
  act::ActConfig cfg = toy_config();
  cfg.d = 4;
  cfg.T = 8;
  cfg.dropout_rate = 0.0;
  const auto graphs = toy_graphs(6);
  std::mt19937_64 rng(12);
  const auto base = randomized(act::init_params(cfg, 4), rng, 0.2);
  const Tensor window = random_tensor({cfg.T, 6, cfg.F}, rng);
  std::vector<double> y(6);
  for (double& v : y) v = std::normal_distribution<double>(0.0, 0.05)(rng);
  const std::vector<std::uint8_t> mask = {1, 1, 0, 1, 1, 1};
  std::vector<Tensor> points;
  for (const auto& n : base.names()) points.push_back(base.at(n));
  const act::MultiScalarFn f = [&](const std::vector<Tensor>& xs) {
    act::Params p;
    for (std::size_t i = 0; i < xs.size(); ++i) p.add(base.names()[i], xs[i]);
    return act::total_loss(act::act_forward(window, graphs, p, cfg).y, y, mask, 0.5).total;
  };
  EXPECT_LT(act::finite_difference_check(f, points, 1e-6), 1e-4);
}

TEST(Checkpoint, RoundTripIsExact) {
  Fixture f;
  const std::string text = act::format_checkpoint(f.cfg, f.params);
  const auto ck = act::parse_checkpoint(text, "mem");
  EXPECT_EQ(ck.config, f.cfg);
  for (const auto& n : f.params.names()) {
    const auto a = f.params.at(n).values(), b = ck.params.at(n).values();
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]) << n;
  }
  EXPECT_EQ(act::format_checkpoint(ck.config, ck.params), text);
}

TEST(Checkpoint, RejectsCorruption) {
  Fixture f;
  std::string text = act::format_checkpoint(f.cfg, f.params);
  EXPECT_THROW(act::parse_checkpoint("act-checkpoint v9\n", "mem"), act::Error);
  const auto pos = text.find("param acf.w1");
  EXPECT_THROW(act::parse_checkpoint(text.substr(0, pos), "mem"), act::Error);
}

TEST(Config, KeyValueRoundTrip) {
  auto cfg = toy_config();
  cfg.ablation = act::ablation_preset("wo_sci");
  auto kv = act::to_key_values(cfg);
  act::ActConfig back;
  act::apply_key_values(back, kv);
  EXPECT_TRUE(kv.empty());
  EXPECT_EQ(back, cfg);
}

TEST(Config, ValidationAndParsing) {
  auto cfg = toy_config();
  cfg.lambda = 2.0;
  EXPECT_THROW(cfg.validate(), act::ConfigError);
  cfg = toy_config();
  cfg.d = 0;
  EXPECT_THROW(cfg.validate(), act::ConfigError);
  const auto kv = act::parse_key_value_text("# comment\nd = 16\n  k=4 # trailing\n", "mem");
  EXPECT_EQ(kv.at("d"), "16");
  EXPECT_EQ(kv.at("k"), "4");
  EXPECT_THROW(act::parse_key_value_text("d=1\nd=2\n", "mem"), act::ConfigError);
  EXPECT_THROW(act::parse_key_value_text("nonsense\n", "mem"), act::ConfigError);
  EXPECT_THROW(act::parse_size("d", "-3"), act::ConfigError);
  EXPECT_THROW(act::parse_real("lr", "abc"), act::ConfigError);
  EXPECT_TRUE(act::parse_bool("x", "true"));
}
