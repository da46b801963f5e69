#include "act/factor/regression.hpp"

#include <cmath>
#include <unordered_map>

#include "act/data/csv.hpp"
#include "act/error.hpp"

namespace act {

OlsResult ols(const Eigen::VectorXd& y, const Eigen::MatrixXd& x) {
  const Eigen::Index t = x.rows();
  const Eigen::Index p = x.cols();
  if (y.size() != t) throw ShapeError("ols: y and X disagree on the number of rows");
  if (t <= p) throw DataError("ols: need more observations than regressors");
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < p) throw DataError("ols: design matrix is rank deficient");
  OlsResult r;
  r.coef = qr.solve(y);
  r.residuals = y - x * r.coef;
  const double mean = y.mean();
  const double tss = (y.array() - mean).square().sum();
  const double rss = r.residuals.squaredNorm();
  r.r2 = tss > 0.0 ? 1.0 - rss / tss : 1.0;
  return r;
}

std::vector<double> bartlett_weights(std::size_t lags) {
  std::vector<double> w;
  for (std::size_t l = 1; l <= lags; ++l) w.push_back(1.0 - static_cast<double>(l) / static_cast<double>(lags + 1));
  return w;
}

HacResult newey_west_se(const Eigen::MatrixXd& x, const Eigen::VectorXd& residuals, std::size_t lags,
                        bool dof_correction) {
  const Eigen::Index t = x.rows();
  const Eigen::Index p = x.cols();
  if (residuals.size() != t) throw ShapeError("newey_west_se: residual length mismatch");
  if (t <= p + static_cast<Eigen::Index>(lags)) throw DataError("newey_west_se: need T > p + lags");
  const Eigen::MatrixXd scores = x.array().colwise() * residuals.array();  // row t = e_t x_t'
  Eigen::MatrixXd s = scores.transpose() * scores / static_cast<double>(t);
  const auto w = bartlett_weights(lags);
  for (std::size_t l = 1; l <= lags; ++l) {
    const Eigen::Index n = t - static_cast<Eigen::Index>(l);
    const Eigen::MatrixXd g = scores.bottomRows(n).transpose() * scores.topRows(n) / static_cast<double>(t);
    s += w[l - 1] * (g + g.transpose());
  }
  const Eigen::MatrixXd xtx_inv = (x.transpose() * x).inverse();
  Eigen::MatrixXd cov = static_cast<double>(t) * xtx_inv * s * xtx_inv;
  if (dof_correction) cov *= static_cast<double>(t) / static_cast<double>(t - p);
  HacResult r;
  r.se.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double v = cov(j, j);
    if (!(v > 0.0)) {
      r.flagged = true;
      r.se(j) = std::numeric_limits<double>::quiet_NaN();
    } else {
      r.se(j) = std::sqrt(v);
    }
  }
  return r;
}

std::string significance_stars(double t) {
  const double a = std::abs(t);
  if (a >= 2.576) return "***";
  if (a >= 1.960) return "**";
  if (a >= 1.645) return "*";
  return "";
}

RegressionResult ff_regression(const std::vector<std::string>& dates, const std::vector<double>& returns,
                               const FactorSeries& factors, FactorModel model, std::size_t lags, bool dof_correction) {
  if (dates.size() != returns.size()) throw ShapeError("ff_regression: dates and returns differ in length");
  std::unordered_map<std::string, std::size_t> fidx;
  for (std::size_t i = 0; i < factors.dates.size(); ++i) fidx[factors.dates[i]] = i;
  const std::size_t k = model == FactorModel::ff3 ? 3 : 5;
  const std::vector<double>* cols[5] = {&factors.mktrf, &factors.smb, &factors.hml, &factors.rmw, &factors.cma};

  std::vector<std::size_t> rows, frows;
  for (std::size_t i = 0; i < dates.size(); ++i) {
    const auto it = fidx.find(dates[i]);
    if (it != fidx.end() && std::isfinite(returns[i])) {
      rows.push_back(i);
      frows.push_back(it->second);
    }
  }
  if (rows.empty()) throw DataError("ff_regression: no dates shared with the factor series");
  if (rows.size() < k + 1 + lags + 2) {
    throw DataError("ff_regression: only " + std::to_string(rows.size()) + " overlapping dates");
  }
  const Eigen::Index t = static_cast<Eigen::Index>(rows.size());
  Eigen::VectorXd y(t);
  Eigen::MatrixXd x(t, static_cast<Eigen::Index>(k + 1));
  for (Eigen::Index r = 0; r < t; ++r) {
    const std::size_t f = frows[static_cast<std::size_t>(r)];
    y(r) = returns[rows[static_cast<std::size_t>(r)]] - factors.risk_free[f];
    x(r, 0) = 1.0;
    for (std::size_t c = 0; c < k; ++c) x(r, static_cast<Eigen::Index>(c + 1)) = (*cols[c])[f];
  }
  const OlsResult fit = ols(y, x);
  const HacResult hac = newey_west_se(x, fit.residuals, lags, dof_correction);

  RegressionResult out;
  out.model = model == FactorModel::ff3 ? "FF3" : "FF5";
  out.alpha = fit.coef(0);
  for (std::size_t c = 0; c < k; ++c) out.betas.push_back(fit.coef(static_cast<Eigen::Index>(c + 1)));
  for (Eigen::Index j = 0; j <= static_cast<Eigen::Index>(k); ++j) {
    out.se.push_back(hac.se(j));
    out.t.push_back(fit.coef(j) / hac.se(j));
    out.stars.push_back(significance_stars(out.t.back()));
  }
  out.r2 = fit.r2;
  out.n_obs = rows.size();
  out.lags = lags;
  out.dof_correction = dof_correction;
  out.se_flagged = hac.flagged;
  return out;
}

namespace {

std::string num(double v) { return std::isfinite(v) ? csv::format_double(v) : std::string("nan"); }

}  // namespace

std::string format_regression_csv(const std::vector<RegressionResult>& results) {
  std::string out = "model,alpha,t_alpha,beta_m,beta_s,beta_h,beta_r,beta_c,r2,obs\n";
  for (const auto& r : results) {
    out += r.model + ',' + num(r.alpha) + ',' + num(r.t[0]);
    for (std::size_t c = 0; c < 5; ++c) out += ',' + (c < r.betas.size() ? num(r.betas[c]) : std::string());
    out += ',' + num(r.r2) + ',' + std::to_string(r.n_obs) + '\n';
  }
  return out;
}

std::string format_regression_detail_csv(const std::vector<RegressionResult>& results) {
  static const char* terms[6] = {"alpha", "mktrf", "smb", "hml", "rmw", "cma"};
  std::string out = "model,term,coef,se,t,stars\n";
  for (const auto& r : results) {
    for (std::size_t j = 0; j < r.se.size(); ++j) {
      const double coef = j == 0 ? r.alpha : r.betas[j - 1];
      out += r.model + ',' + terms[j] + ',' + num(coef) + ',' + num(r.se[j]) + ',' + num(r.t[j]) + ',' + r.stars[j] + '\n';
    }
  }
  return out;
}

}  // namespace act
