#include <gtest/gtest.h>

#include "act/decompose/decompose.hpp"
#include "act/error.hpp"
#include "support.hpp"

using act::Tensor;

TEST(Cma, HandValues) {
  const Tensor x(act::Shape{4, 1}, {1, 2, 3, 4});
  const Tensor y = act::causal_moving_average(x, 2);
  EXPECT_EQ(y[0], 1.0);
  EXPECT_EQ(y[1], 1.5);
  EXPECT_EQ(y[2], 2.5);
  EXPECT_EQ(y[3], 3.5);
  // Warm-up divides by the number of available steps.
  const Tensor z = act::causal_moving_average(x, 10);
  EXPECT_EQ(z[2], 2.0);
  EXPECT_EQ(z[3], 2.5);
}

TEST(Cma, WindowOneIsIdentity) {
  std::mt19937_64 rng(1);
  const Tensor x = testing_support::random_tensor({7, 3, 2}, rng);
  const Tensor y = act::causal_moving_average(x, 1);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(x[i], y[i]);
}

TEST(Cma, RejectsZeroWindow) {
  EXPECT_THROW(act::causal_moving_average(Tensor({3, 1}), 0), act::ConfigError);
}

TEST(Cma, IsCausal) {
  std::mt19937_64 rng(2);
  Tensor x = testing_support::random_tensor({10, 2, 2}, rng);
  const Tensor a = act::causal_moving_average(x, 4);
  for (std::size_t i = 6 * 4; i < x.size(); ++i) x.mutable_values()[i] = 99.0;
  const Tensor b = act::causal_moving_average(x, 4);
  for (std::size_t i = 0; i < 6 * 4; ++i) EXPECT_EQ(a[i], b[i]);
}

TEST(Tcd, ReconstructsInput) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const Tensor x = testing_support::random_tensor({12, 4, 3}, rng, 5.0);
    const auto d = act::tcd_decompose(x, 5, 2);
    for (std::size_t i = 0; i < x.size(); ++i) {
      EXPECT_NEAR(d.trend[i] + d.fluct[i] + d.shock[i], x[i], 1e-12);
    }
  }
}

TEST(Tcd, MatchesLoopOracleBitForBit) {
  std::mt19937_64 rng(4);
  const Tensor x = testing_support::random_tensor({25, 3, 4}, rng);
  const auto d = act::tcd_decompose(x, 20, 5);
  const auto o = oracle::tcd(testing_support::to_seq(x), 20, 5);
  const Tensor ot = testing_support::from_seq(o.trend), of = testing_support::from_seq(o.fluct),
               os = testing_support::from_seq(o.shock);
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_EQ(d.trend[i], ot[i]);
    EXPECT_EQ(d.fluct[i], of[i]);
    EXPECT_EQ(d.shock[i], os[i]);
  }
  EXPECT_EQ(d.tau, 20u);
  EXPECT_EQ(d.sigma, 5u);
}

TEST(Tcd, ConstantSeriesIsAllTrend) {
  const Tensor x = Tensor::filled({8, 2, 2}, 3.25);
  const auto d = act::tcd_decompose(x, 4, 2);
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_EQ(d.trend[i], 3.25);
    EXPECT_EQ(d.fluct[i], 0.0);
    EXPECT_EQ(d.shock[i], 0.0);
  }
}

TEST(Tcd, LinearRampTrendLagsByHalfWindow) {
  // CMA of t over a full window w is t - (w-1)/2.
  std::vector<double> v(30);
  for (std::size_t t = 0; t < 30; ++t) v[t] = static_cast<double>(t);
  const auto d = act::tcd_decompose(Tensor(act::Shape{30, 1, 1}, v), 6, 3);
  for (std::size_t t = 5; t < 30; ++t) EXPECT_NEAR(d.trend[t], t - 2.5, 1e-12);
  // x - trend is constant 2.5 once both windows are full, so shock vanishes.
  for (std::size_t t = 10; t < 30; ++t) EXPECT_NEAR(d.shock[t], 0.0, 1e-12);
}
