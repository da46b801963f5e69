#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "act/data/synthetic.hpp"
#include "act/error.hpp"
#include "act/model/model.hpp"
#include "act/tensor/gradcheck.hpp"
#include "act/tensor/ops.hpp"
#include "act/train/adam.hpp"
#include "act/train/loss.hpp"
#include "act/train/trainer.hpp"
#include "support.hpp"

using act::Tensor;

namespace {

std::vector<double> labels(std::size_t n, std::mt19937_64& rng, double scale = 0.05) {
  std::normal_distribution<double> nd(0.0, scale);
  std::vector<double> y(n);
  for (double& v : y) v = nd(rng);
  return y;
}

Tensor as_tensor(const std::vector<double>& v) { return Tensor::vector(v); }

std::vector<double> clipped(std::vector<double> y) {
  for (double& v : y) v = std::clamp(v, -0.1, 0.1);
  return y;
}

}  // namespace

TEST(IcLoss, PerfectAndInverse) {
  std::mt19937_64 rng(1);
  const auto y = labels(50, rng, 0.08);
  const std::vector<std::uint8_t> mask(50, 1);
  const auto yc = clipped(y);
  EXPECT_LT(act::ic_loss(as_tensor(yc), y, mask).item(), 1e-6);
  std::vector<double> neg(yc);
  for (double& v : neg) v = -v;
  const double inv = act::ic_loss(as_tensor(neg), y, mask).item();
  EXPECT_GE(inv, 1.999);
  EXPECT_LE(inv, 2.001);
}

TEST(IcLoss, ConstantPredictionIsOne) {
  const std::vector<double> y = {0.01, -0.02, 0.03, 0.0};
  const double l = act::ic_loss(Tensor::filled({4}, 0.7), y, std::vector<std::uint8_t>(4, 1)).item();
  EXPECT_NEAR(l, oracle::ic_loss({0.7, 0.7, 0.7, 0.7}, y), 1e-15);
  EXPECT_NEAR(l, 1.0, 1e-12);
}

TEST(IcLoss, MatchesOracleWithClippingAndMask) {
  std::mt19937_64 rng(2);
  const auto y = labels(30, rng, 0.1);  // some beyond the clip
  const auto p = labels(30, rng, 1.0);
  std::vector<std::uint8_t> mask(30, 1);
  mask[3] = mask[17] = 0;
  std::vector<double> po, yo;
  for (std::size_t i = 0; i < 30; ++i)
    if (mask[i]) {
      po.push_back(p[i]);
      yo.push_back(y[i]);
    }
  EXPECT_NEAR(act::ic_loss(as_tensor(p), y, mask).item(), oracle::ic_loss(po, yo), 1e-14);
}

TEST(IcLoss, AffineInvariance) {
  std::mt19937_64 rng(3);
  const auto y = labels(100, rng);
  const auto p = labels(100, rng, 1.0);
  const std::vector<std::uint8_t> mask(100, 1);
  const double base = act::ic_loss(as_tensor(p), y, mask).item();
  for (auto [a, b] : std::vector<std::pair<double, double>>{{1.5, 0.0}, {2.0, -3.0}, {10.0, 5.0}, {1e3, 1e3}}) {
    std::vector<double> q(p);
    for (double& v : q) v = a * v + b;
    EXPECT_NEAR(act::ic_loss(as_tensor(q), y, mask).item(), base, 1e-10) << a << " " << b;
  }
}

TEST(IcLoss, TooFewLabels) {
  const std::vector<std::uint8_t> mask = {1, 0, 0};
  EXPECT_THROW(act::ic_loss(Tensor::vector({1, 2, 3}), {0.1, 0.2, 0.3}, mask), act::DataError);
  const auto t = act::total_loss(Tensor::vector({1, 2, 3}), {0.05, 0.2, 0.3}, mask, 0.5);
  EXPECT_TRUE(t.ic_skipped);
  EXPECT_NEAR(t.total.item(), 0.5 * (1 - 0.05) * (1 - 0.05), 1e-15);
}

TEST(MseLoss, ClippedMean) {
  const double l =
      act::mse_loss(Tensor::vector({0.0, 0.0, 1.0}), {0.5, -0.05, 1.0}, {1, 1, 0}).item();
  EXPECT_NEAR(l, (0.01 + 0.0025) / 2.0, 1e-16);
}

TEST(TotalLoss, LambdaMix) {
  std::mt19937_64 rng(4);
  const auto y = labels(10, rng);
  const auto p = labels(10, rng);
  const std::vector<std::uint8_t> mask(10, 1);
  const double ic = act::ic_loss(as_tensor(p), y, mask).item();
  const double mse = act::mse_loss(as_tensor(p), y, mask).item();
  EXPECT_EQ(act::total_loss(as_tensor(p), y, mask, 0.0).total.item(), ic);
  EXPECT_NEAR(act::total_loss(as_tensor(p), y, mask, 1.0).total.item(), ic + mse, 1e-15);
  EXPECT_THROW(act::total_loss(as_tensor(p), y, mask, 1.5), act::ConfigError);
}

TEST(TotalLoss, GradientIsSumOfTermGradients) {
  std::mt19937_64 rng(5);
  const auto y = labels(8, rng);
  const Tensor p = testing_support::random_tensor({8}, rng);
  const std::vector<std::uint8_t> mask(8, 1);
  auto grad_of = [&](auto fn) {
    act::Tape tape;
    act::TapeScope scope(tape);
    const Tensor w = tape.watch(p);
    tape.backward(fn(w));
    return tape.gradient(w);
  };
  const double lambda = 0.3;
  const Tensor gt = grad_of([&](const Tensor& w) { return act::total_loss(w, y, mask, lambda).total; });
  const Tensor gi = grad_of([&](const Tensor& w) { return act::ic_loss(w, y, mask); });
  const Tensor gm = grad_of([&](const Tensor& w) { return act::mse_loss(w, y, mask); });
  for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(gt[i], gi[i] + lambda * gm[i], 1e-14);
  const act::ScalarFn f = [&](const Tensor& w) { return act::total_loss(w, y, mask, lambda).total; };
  EXPECT_LT(act::finite_difference_check(f, p, 1e-6), 1e-6);
}

TEST(Adam, FirstStepsByHand) {
  act::Params p;
  p.add("w", Tensor::vector({1.0, -2.0}));
  act::Adam opt({0.1, 0.9, 0.999, 1e-8});
  opt.step(p, {{"w", {0.5, -4.0}}});
  // Bias-corrected first step is lr * g / (|g| + eps).
  const double w1 = 1.0 - 0.1 * 0.5 / (0.5 + 1e-8);
  EXPECT_NEAR(p.at("w")[0], w1, 1e-15);
  EXPECT_NEAR(p.at("w")[1], -2.0 + 0.1 * 4.0 / (4.0 + 1e-8), 1e-15);
  opt.step(p, {{"w", {1.0, 0.0}}});
  const double m = 0.9 * 0.05 + 0.1 * 1.0, v = 0.999 * 0.00025 + 0.001 * 1.0;
  const double mh = m / (1 - 0.81), vh = v / (1 - 0.999 * 0.999);
  EXPECT_NEAR(p.at("w")[0], w1 - 0.1 * mh / (std::sqrt(vh) + 1e-8), 1e-14);
  EXPECT_EQ(opt.steps(), 2u);
}

namespace {

struct SmallRun {
  act::SyntheticMarket market;
  act::PanelDataset ds;
  act::ActConfig cfg;
  act::TrainOptions opt;
  SmallRun() {
    act::SyntheticConfig sc;
    sc.num_instruments = 8;
    sc.days = 90;
    sc.lookback = 16;
    sc.industry_size = 4;
    market = act::generate_synthetic(sc);
    ds = act::preprocess_features(market.dataset);
    cfg.d = 4;
    cfg.T = 16;
    cfg.k = 3;
    opt.epochs = 3;
    opt.patience = 5;
    opt.seed = 9;
  }
};

}  // namespace

TEST(Trainer, SplitResolution) {
  SmallRun r;
  const auto s = act::resolve_split(r.ds, r.opt);
  EXPECT_EQ(s.valid_start, 54u);
  EXPECT_EQ(s.test_start, 72u);
  r.opt.valid_start = r.ds.dates[60];
  r.opt.test_start = r.ds.dates[75];
  const auto t = act::resolve_split(r.ds, r.opt);
  EXPECT_EQ(t.valid_start, 60u);
  EXPECT_EQ(t.test_start, 75u);
  r.opt.test_start = r.ds.dates[50];
  EXPECT_THROW(act::resolve_split(r.ds, r.opt), act::ConfigError);
  r.opt.test_start = "1999-01-01";
  EXPECT_THROW(act::resolve_split(r.ds, r.opt), act::Error);
}

TEST(Trainer, DeterministicAndSelectsBestEpoch) {
  SmallRun r;
  const auto a = act::train(r.ds, r.market.graphs, r.cfg, r.opt);
  const auto b = act::train(r.ds, r.market.graphs, r.cfg, r.opt);
  EXPECT_EQ(act::format_history_csv(a.history), act::format_history_csv(b.history));
  for (const auto& n : a.params.names()) {
    const auto x = a.params.at(n).values(), y = b.params.at(n).values();
    for (std::size_t i = 0; i < x.size(); ++i) ASSERT_EQ(x[i], y[i]) << n;
  }
  ASSERT_GE(a.history.selected_epoch, 1u);
  const double chosen = a.history.epochs[a.history.selected_epoch - 1].valid_ic;
  for (const auto& e : a.history.epochs) EXPECT_LE(e.valid_ic, chosen);
  // The returned parameters reproduce the selected epoch's validation IC.
  const double again = act::validation_ic(a.params, r.ds, r.market.graphs, r.cfg, a.split.valid_start,
                                          a.split.test_start - 1);
  EXPECT_NEAR(again, chosen, 1e-12);
}

TEST(Trainer, SeedChangesRun) {
  SmallRun r;
  const auto a = act::train(r.ds, r.market.graphs, r.cfg, r.opt);
  r.opt.seed = 10;
  const auto b = act::train(r.ds, r.market.graphs, r.cfg, r.opt);
  EXPECT_NE(act::format_history_csv(a.history), act::format_history_csv(b.history));
}

TEST(Trainer, PatienceStopsEarly) {
  SmallRun r;
  r.opt.epochs = 12;
  r.opt.patience = 1;
  r.opt.adam.lr = 0.05;  // noisy enough to stall
  const auto a = act::train(r.ds, r.market.graphs, r.cfg, r.opt);
  const auto& h = a.history;
  ASSERT_FALSE(h.epochs.empty());
  if (h.epochs.size() < 12) EXPECT_EQ(h.epochs.size(), h.selected_epoch + 1);
}

TEST(Trainer, PredictSlidingCoversTestRange) {
  SmallRun r;
  const auto p = act::init_params(r.cfg, 1);
  const auto preds = act::predict_sliding(p, r.ds, r.market.graphs, r.cfg, 72, r.ds.num_dates());
  std::size_t expected = 0;
  for (std::size_t t = 72; t < r.ds.num_dates(); ++t)
    for (std::size_t i = 0; i < 8; ++i) expected += r.ds.tradable[t * 8 + i];
  EXPECT_EQ(preds.records.size(), expected);
  EXPECT_EQ(preds.records.front().date, r.ds.dates[72]);
  EXPECT_THROW(act::predict_sliding(p, r.ds, r.market.graphs, r.cfg, 0, 10), act::DataError);
}

TEST(Trainer, NoTrainingWindows) {
  SmallRun r;
  r.opt.valid_start = r.ds.dates[10];
  EXPECT_THROW(act::train(r.ds, r.market.graphs, r.cfg, r.opt), act::ConfigError);
}
