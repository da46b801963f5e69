#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "act/error.hpp"
#include "act/tensor/ops.hpp"
#include "gradcases.hpp"

using act::Shape;
using act::Tensor;
namespace ops = act::ops;

TEST(Tensor, ConstructionAndAccess) {
  const Tensor m = Tensor::matrix({{1, 2, 3}, {4, 5, 6}});
  EXPECT_EQ(m.shape(), (Shape{2, 3}));
  EXPECT_EQ(m.at({1, 2}), 6.0);
  EXPECT_EQ(m.dim(-1), 3u);
  EXPECT_EQ(Tensor::scalar(2.5).item(), 2.5);
  EXPECT_EQ(Tensor::filled({2, 2}, 7.0)[3], 7.0);
  EXPECT_EQ(Tensor().rank(), 0u);
  EXPECT_THROW(Tensor(Shape{2, 2}, {1.0, 2.0}), act::ShapeError);
  EXPECT_THROW(m.item(), act::Error);
}

TEST(Tensor, TrackedValuesAreImmutable) {
  act::Tape tape;
  act::TapeScope scope(tape);
  Tensor w = tape.watch(Tensor::vector({1, 2}));
  EXPECT_TRUE(w.tracked());
  EXPECT_THROW(w.mutable_values(), act::Error);
  Tensor d = w.detach();
  EXPECT_FALSE(d.tracked());
  d.mutable_values()[0] = 5.0;
  EXPECT_EQ(w[0], 1.0);
}

TEST(Ops, MatmulValues) {
  const Tensor a = Tensor::matrix({{1, 2}, {3, 4}});
  const Tensor b = Tensor::matrix({{5, 6}, {7, 8}});
  const Tensor c = ops::matmul(a, b);
  EXPECT_EQ(c.at({0, 0}), 19.0);
  EXPECT_EQ(c.at({0, 1}), 22.0);
  EXPECT_EQ(c.at({1, 0}), 43.0);
  EXPECT_EQ(c.at({1, 1}), 50.0);
  EXPECT_THROW(ops::matmul(a, Tensor::matrix({{1, 2, 3}})), act::ShapeError);
}

TEST(Ops, BroadcastAdd) {
  const Tensor a = Tensor::matrix({{1, 2, 3}, {4, 5, 6}});
  const Tensor c = ops::add(a, Tensor::vector({10, 20, 30}));
  EXPECT_EQ(c.at({1, 2}), 36.0);
  const Tensor col(Shape{2, 1}, {100, 200});
  EXPECT_EQ(ops::sub(a, col).at({1, 0}), -196.0);
  EXPECT_THROW(ops::add(a, Tensor::vector({1, 2})), act::ShapeError);
}

TEST(Ops, NonFiniteResultRaises) {
  EXPECT_THROW(ops::div(Tensor::vector({1.0}), Tensor::vector({0.0})), act::NumericError);
  EXPECT_THROW(ops::sqrt(Tensor::vector({-1.0})), act::NumericError);
}

TEST(Ops, CausalConvIsCausal) {
  // Output at t must not change when inputs after t change.
  std::mt19937_64 rng(3);
  Tensor x = testing_support::random_tensor({6, 2, 3}, rng);
  const Tensor w = testing_support::random_tensor({3, 3, 4}, rng);
  const Tensor b = testing_support::random_tensor({4}, rng);
  const Tensor y1 = ops::causal_conv1d(x, w, b);
  for (std::size_t i = 4 * 6; i < x.size(); ++i) x.mutable_values()[i] += 10.0;
  const Tensor y2 = ops::causal_conv1d(x, w, b);
  for (std::size_t i = 0; i < 4 * 2 * 4; ++i) EXPECT_EQ(y1[i], y2[i]);
  EXPECT_EQ(y1.shape(), (Shape{6, 2, 4}));
}

TEST(Ops, CausalConvMatchesLoop) {
  std::mt19937_64 rng(4);
  const Tensor x = testing_support::random_tensor({5, 2, 3}, rng);
  const Tensor w = testing_support::random_tensor({2, 3, 2}, rng);
  const Tensor b = testing_support::random_tensor({2}, rng);
  const std::size_t dil = 2;
  const Tensor y = ops::causal_conv1d(x, w, b, dil);
  for (std::size_t t = 0; t < 5; ++t)
    for (std::size_t n = 0; n < 2; ++n)
      for (std::size_t o = 0; o < 2; ++o) {
        double s = b[o];
        for (std::size_t k = 0; k < 2; ++k) {
          const std::size_t back = (1 - k) * dil;
          if (back > t) continue;
          for (std::size_t c = 0; c < 3; ++c) s += x.at({t - back, n, c}) * w.at({k, c, o});
        }
        EXPECT_NEAR(y.at({t, n, o}), s, 1e-14);
      }
}

TEST(Ops, LayerNormNormalizes) {
  const Tensor x = Tensor::matrix({{1, 2, 3, 4}, {-1, 0, 0, 1}});
  const Tensor y = ops::layer_norm(x, Tensor::filled({4}, 1.0), Tensor({4}), 0.0);
  for (int r = 0; r < 2; ++r) {
    double m = 0, v = 0;
    for (int c = 0; c < 4; ++c) m += y[r * 4 + c];
    for (int c = 0; c < 4; ++c) v += y[r * 4 + c] * y[r * 4 + c];
    EXPECT_NEAR(m, 0.0, 1e-14);
    EXPECT_NEAR(v / 4, 1.0, 1e-12);
  }
}

TEST(Ops, SoftmaxMaskedEntriesAreZero) {
  const Tensor x = Tensor::matrix({{1, 2, 3}, {0, 0, 0}});
  const Tensor y = ops::softmax(x, 1, {1, 0, 1, 0, 1, 1});
  EXPECT_EQ(y.at({0, 1}), 0.0);
  EXPECT_EQ(y.at({1, 0}), 0.0);
  EXPECT_NEAR(y.at({0, 0}) + y.at({0, 2}), 1.0, 1e-15);
  EXPECT_NEAR(y.at({1, 1}), 0.5, 1e-15);
  EXPECT_NEAR(y.at({0, 2}) / y.at({0, 0}), std::exp(2.0), 1e-12);
}

TEST(Ops, DropoutEvalIsIdentityAndTrainScales) {
  std::mt19937_64 rng(1);
  const Tensor x = Tensor::filled({1000}, 1.0);
  const Tensor e = ops::dropout(x, 0.5, false, rng);
  for (double v : e.values()) EXPECT_EQ(v, 1.0);
  const Tensor t = ops::dropout(x, 0.5, true, rng);
  std::size_t zeros = 0;
  for (double v : t.values()) {
    EXPECT_TRUE(v == 0.0 || v == 2.0);
    zeros += v == 0.0;
  }
  EXPECT_GT(zeros, 400u);
  EXPECT_LT(zeros, 600u);
}

TEST(Ops, ReductionsAndSelection) {
  const Tensor x = Tensor::matrix({{1, 2, 3}, {4, 5, 6}});
  EXPECT_EQ(ops::sum_all(x).item(), 21.0);
  EXPECT_EQ(ops::mean_axis(x, 0)[2], 4.5);
  EXPECT_EQ(ops::sum_axis(x, 1)[1], 15.0);
  const Tensor g = ops::gather_rows(x, {1, 1, 0});
  EXPECT_EQ(g.shape(), (Shape{3, 3}));
  EXPECT_EQ(g.at({2, 0}), 1.0);
  const Tensor m = ops::masked_select(x, {0, 1, 0, 0, 0, 1});
  EXPECT_EQ(m.shape(), (Shape{2}));
  EXPECT_EQ(m[1], 6.0);
  const Tensor s = ops::scatter_rows(Tensor::matrix({{1, 1}, {2, 2}}), {2, 2}, 3);
  EXPECT_EQ(s.at({2, 1}), 3.0);
  EXPECT_EQ(s.at({0, 0}), 0.0);
  EXPECT_EQ(ops::clip(x, 2, 5)[0], 2.0);
  EXPECT_THROW(ops::reshape(x, {4}), act::ShapeError);
}

TEST(Tape, GradientOfUnusedLeafIsZero) {
  act::Tape tape;
  act::TapeScope scope(tape);
  const Tensor a = tape.watch(Tensor::vector({1, 2}));
  const Tensor b = tape.watch(Tensor::vector({3, 4}));
  const Tensor loss = ops::sum_all(ops::mul(a, a));
  tape.backward(loss);
  EXPECT_EQ(tape.gradient(a)[1], 4.0);
  EXPECT_EQ(tape.gradient(b)[0], 0.0);
}

TEST(Tape, ReusedTensorAccumulates) {
  act::Tape tape;
  act::TapeScope scope(tape);
  const Tensor a = tape.watch(Tensor::scalar(3.0));
  const Tensor loss = ops::add(ops::mul(a, a), ops::mul(a, Tensor::scalar(2.0)));
  tape.backward(loss);
  EXPECT_EQ(tape.gradient(a).item(), 8.0);
}

class PrimitiveGrad : public ::testing::TestWithParam<std::size_t> {};

TEST_P(PrimitiveGrad, FiniteDifference) {
  const auto cases = testing_support::primitive_grad_cases();
  const auto& c = cases.at(GetParam());
  const double err = act::finite_difference_check(c.fn, c.points, 1e-6);
  EXPECT_LT(err, 1e-5) << c.name;
}

INSTANTIATE_TEST_SUITE_P(All, PrimitiveGrad,
                         ::testing::Range<std::size_t>(0, testing_support::primitive_grad_cases().size()),
                         [](const auto& info) { return testing_support::primitive_grad_cases()[info.param].name; });

TEST(GradCheck, CoversEveryPrimitiveKind) {
  // Every catalog entry appears in the case list under its own name.
  const auto cases = testing_support::primitive_grad_cases();
  for (int k = 0; k <= static_cast<int>(act::PrimitiveKind::reshape); ++k) {
    std::string name(act::kind_name(static_cast<act::PrimitiveKind>(k)));
    for (char& ch : name) ch = ch == '-' ? '_' : ch;
    if (name == "softmax_axis") name = "softmax";
    if (name == "concat_last_axis") name = "concat_last";
    bool found = false;
    for (const auto& c : cases) found = found || c.name == name;
    EXPECT_TRUE(found) << name;
  }
}

TEST(GradCheck, DetectsWrongGradient) {
  // Half the dependence bypasses the tape: analytic 1 vs numeric 2.
  const act::ScalarFn f = [](const Tensor& x) { return ops::add(ops::sum_all(x), ops::sum_all(x.detach())); };
  EXPECT_GT(act::finite_difference_check(f, Tensor::vector({1, 2}), 1e-6), 0.5);
}
