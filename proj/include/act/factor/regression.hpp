#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "act/data/panel.hpp"

namespace act {

struct OlsResult {
  Eigen::VectorXd coef;
  Eigen::VectorXd residuals;
  double r2 = 0.0;  // centred
};

// Column-pivoted QR. Throws DataError unless T > p and X has full column rank.
OlsResult ols(const Eigen::VectorXd& y, const Eigen::MatrixXd& x);

// w_l = 1 - l / (lags + 1), l = 1..lags.
std::vector<double> bartlett_weights(std::size_t lags);

struct HacResult {
  Eigen::VectorXd se;
  bool flagged = false;  // a covariance diagonal came out non-positive
};

// T (X'X)^-1 S (X'X)^-1 with S = G0 + sum_l w_l (G_l + G_l'), G_l = (1/T)
// sum_t e_t e_{t-l} x_t x_{t-l}'. dof_correction scales by T / (T - p).
HacResult newey_west_se(const Eigen::MatrixXd& x, const Eigen::VectorXd& residuals, std::size_t lags,
                        bool dof_correction = false);

enum class FactorModel { ff3, ff5 };

struct RegressionResult {
  std::string model;  // "FF3" / "FF5"
  double alpha = 0.0;
  std::vector<double> betas;  // MktRF, SMB, HML[, RMW, CMA]
  std::vector<double> se;     // alpha first
  std::vector<double> t;      // alpha first
  std::vector<std::string> stars;
  double r2 = 0.0;
  std::size_t n_obs = 0;
  std::size_t lags = 0;
  bool dof_correction = false;
  bool se_flagged = false;
};

// "***" at |t| >= 2.576, "**" at 1.960, "*" at 1.645.
std::string significance_stars(double t);

// Regresses returns - rf on the factor columns over the dates both series
// share. Throws DataError when fewer than p + lags + 2 dates overlap.
RegressionResult ff_regression(const std::vector<std::string>& dates, const std::vector<double>& returns,
                               const FactorSeries& factors, FactorModel model, std::size_t lags = 5,
                               bool dof_correction = false);

// model,alpha,t_alpha,beta_m,beta_s,beta_h,beta_r,beta_c,r2,obs
std::string format_regression_csv(const std::vector<RegressionResult>& results);
// model,term,coef,se,t,stars
std::string format_regression_detail_csv(const std::vector<RegressionResult>& results);

}  // namespace act
