#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "act/error.hpp"
#include "act/factor/regression.hpp"
#include "support.hpp"

namespace {

Eigen::MatrixXd design(std::size_t t, std::size_t p, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXd x(t, p);
  for (std::size_t i = 0; i < t; ++i) {
    x(i, 0) = 1.0;
    for (std::size_t j = 1; j < p; ++j) x(i, j) = nd(rng);
  }
  return x;
}

// Direct double loop over lag pairs.
Eigen::VectorXd nw_loop(const Eigen::MatrixXd& x, const Eigen::VectorXd& e, std::size_t lags) {
  const Eigen::Index t = x.rows(), p = x.cols();
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index a = 0; a < t; ++a)
    for (Eigen::Index b = 0; b < t; ++b) {
      const std::size_t l = static_cast<std::size_t>(std::abs(a - b));
      if (l > lags) continue;
      const double w = 1.0 - static_cast<double>(l) / static_cast<double>(lags + 1);
      s += w * e(a) * e(b) * x.row(a).transpose() * x.row(b);
    }
  const Eigen::MatrixXd inv = (x.transpose() * x).inverse();
  return (inv * s * inv).diagonal().cwiseSqrt();
}

struct Planted {
  std::vector<std::string> dates;
  std::vector<double> returns;
  act::FactorSeries factors;
};

Planted planted(double alpha, std::size_t t, std::uint64_t seed, double rho = 0.3) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Planted p;
  double e = 0.0;
  for (std::size_t i = 0; i < t; ++i) {
    p.dates.push_back("d" + std::to_string(100000 + i));
    p.factors.dates.push_back(p.dates.back());
    p.factors.risk_free.push_back(1e-4);
    p.factors.mktrf.push_back(0.01 * nd(rng));
    p.factors.smb.push_back(0.005 * nd(rng));
    p.factors.hml.push_back(0.005 * nd(rng));
    p.factors.rmw.push_back(0.003 * nd(rng));
    p.factors.cma.push_back(0.003 * nd(rng));
    e = rho * e + 0.005 * nd(rng);
    p.returns.push_back(1e-4 + alpha + 0.9 * p.factors.mktrf[i] + 0.3 * p.factors.smb[i] - 0.2 * p.factors.hml[i] + e);
  }
  return p;
}

}  // namespace

TEST(Ols, MatchesNormalEquations) {
  std::mt19937_64 rng(1);
  const auto x = design(200, 6, rng);
  Eigen::VectorXd y = x * Eigen::VectorXd::LinSpaced(6, -1, 1);
  std::normal_distribution<double> nd;
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += 0.1 * nd(rng);
  const auto r = act::ols(y, x);
  EXPECT_LT((r.coef - oracle::ols_normal(y, x)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((r.residuals - (y - x * r.coef)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_GT(r.r2, 0.9);
  EXPECT_LT(r.r2, 1.0);
}

TEST(Ols, RejectsRankDeficiency) {
  std::mt19937_64 rng(2);
  auto x = design(50, 3, rng);
  x.col(2) = 2.0 * x.col(1);
  EXPECT_THROW(act::ols(Eigen::VectorXd::Ones(50), x), act::DataError);
  EXPECT_THROW(act::ols(Eigen::VectorXd::Ones(3), design(3, 3, rng)), act::DataError);
}

TEST(NeweyWest, BartlettWeights) {
  EXPECT_EQ(act::bartlett_weights(0).size(), 0u);
  const auto w = act::bartlett_weights(3);
  EXPECT_EQ(w, (std::vector<double>{0.75, 0.5, 0.25}));
}

TEST(NeweyWest, LagZeroIsWhite) {
  std::mt19937_64 rng(3);
  const auto x = design(150, 4, rng);
  std::normal_distribution<double> nd;
  Eigen::VectorXd e(150);
  for (Eigen::Index i = 0; i < 150; ++i) e(i) = nd(rng) * (1.0 + std::abs(x(i, 1)));
  const auto r = act::newey_west_se(x, e, 0);
  EXPECT_LT((r.se - oracle::white_se(x, e)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(NeweyWest, MatchesPairLoop) {
  std::mt19937_64 rng(4);
  const auto x = design(80, 3, rng);
  std::normal_distribution<double> nd;
  Eigen::VectorXd e(80);
  double prev = 0.0;
  for (Eigen::Index i = 0; i < 80; ++i) e(i) = prev = 0.5 * prev + nd(rng);
  for (std::size_t lags : {1u, 3u, 7u}) {
    const auto r = act::newey_west_se(x, e, lags);
    EXPECT_LT((r.se - nw_loop(x, e, lags)).cwiseAbs().maxCoeff(), 1e-10) << lags;
  }
  const auto plain = act::newey_west_se(x, e, 2);
  const auto dof = act::newey_west_se(x, e, 2, true);
  EXPECT_NEAR(dof.se(0), plain.se(0) * std::sqrt(80.0 / 77.0), 1e-14);
}

TEST(FamaFrench, RecoversPlantedAlpha) {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    const double alpha = 4e-4;
    const auto p = planted(alpha, 1500, seed);
    for (auto model : {act::FactorModel::ff3, act::FactorModel::ff5}) {
      const auto r = act::ff_regression(p.dates, p.returns, p.factors, model, 5);
      EXPECT_LT(std::abs(r.alpha - alpha), 3.0 * r.se[0]) << seed;
      EXPECT_NEAR(r.betas[0], 0.9, 0.1);
    }
  }
}

TEST(FamaFrench, Ff3AndFf5AgreeWhenRmwCmaIrrelevant) {
  const auto p = planted(2e-4, 1500, 11);
  const auto a = act::ff_regression(p.dates, p.returns, p.factors, act::FactorModel::ff3, 5);
  const auto b = act::ff_regression(p.dates, p.returns, p.factors, act::FactorModel::ff5, 5);
  EXPECT_LT(std::abs(a.alpha - b.alpha), 0.25 * a.se[0]);
  EXPECT_EQ(a.betas.size(), 3u);
  EXPECT_EQ(b.betas.size(), 5u);
  EXPECT_EQ(a.model, "FF3");
  EXPECT_EQ(b.n_obs, 1500u);
}

TEST(FamaFrench, AlignsOnSharedDates) {
  auto p = planted(0.0, 300, 12);
  p.dates.erase(p.dates.begin(), p.dates.begin() + 50);
  p.returns.erase(p.returns.begin(), p.returns.begin() + 50);
  const auto r = act::ff_regression(p.dates, p.returns, p.factors, act::FactorModel::ff3, 2);
  EXPECT_EQ(r.n_obs, 250u);
  p.dates.resize(5);
  p.returns.resize(5);
  EXPECT_THROW(act::ff_regression(p.dates, p.returns, p.factors, act::FactorModel::ff5, 5), act::DataError);
}

TEST(FamaFrench, StarsAndReports) {
  EXPECT_EQ(act::significance_stars(3.0), "***");
  EXPECT_EQ(act::significance_stars(-2.0), "**");
  EXPECT_EQ(act::significance_stars(1.7), "*");
  EXPECT_EQ(act::significance_stars(1.0), "");
  const auto p = planted(1e-3, 400, 13);
  const auto r = act::ff_regression(p.dates, p.returns, p.factors, act::FactorModel::ff3);
  const std::string csv = act::format_regression_csv({r});
  EXPECT_EQ(csv.rfind("model,alpha,t_alpha,beta_m,beta_s,beta_h,beta_r,beta_c,r2,obs\n", 0), 0u);
  EXPECT_NE(act::format_regression_detail_csv({r}).find("alpha"), std::string::npos);
  EXPECT_NEAR(r.t[0], r.alpha / r.se[0], 1e-12);
}
