#include "act/data/synthetic.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

#include "act/error.hpp"

namespace act {

std::vector<std::string> business_days(std::size_t count) {
  using namespace std::chrono;
  std::vector<std::string> out;
  out.reserve(count);
  sys_days day = year{2020} / January / 1;
  while (out.size() < count) {
    const weekday wd{day};
    if (wd != Saturday && wd != Sunday) {
      const year_month_day ymd{day};
      char buf[16];
      std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                    static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
      out.emplace_back(buf);
    }
    day += days{1};
  }
  return out;
}

namespace {

std::string numbered(const char* prefix, std::size_t i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, i);
  return buf;
}

}  // namespace

SyntheticMarket generate_synthetic(const SyntheticConfig& cfg) {
  const std::size_t n = cfg.num_instruments;
  const std::size_t nf = cfg.num_features;
  const std::size_t days = cfg.days;
  if (n < 4) throw ConfigError("synthetic: need at least 4 instruments");
  if (nf < 4) throw ConfigError("synthetic: need at least 4 features");
  if (cfg.lookback == 0 || days < 3 * cfg.lookback) {
    throw ConfigError("synthetic: days must be at least 3 * lookback");
  }
  if (cfg.industry_size == 0 || cfg.num_regions == 0 || cfg.tau_signal == 0) {
    throw ConfigError("synthetic: industry_size, num_regions and tau_signal must be positive");
  }
  if (!(cfg.noise >= 0.0)) throw ConfigError("synthetic: noise must be non-negative");

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  const std::size_t n_ind = (n + cfg.industry_size - 1) / cfg.industry_size;
  const std::size_t n_reg = cfg.num_regions;
  auto industry_of = [&](std::size_t i) { return i / cfg.industry_size; };
  auto region_of = [&](std::size_t i) { return i % n_reg; };

  const double phi = 1.0 - 1.0 / static_cast<double>(cfg.tau_signal);
  const double innov = std::sqrt(1.0 - phi * phi);

  // Latent AR(1) paths with unit stationary variance.
  std::vector<double> ind_latent(days * n_ind), reg_latent(days * n_reg), idio(days * n);
  for (std::size_t g = 0; g < n_ind; ++g) ind_latent[g] = normal(rng);
  for (std::size_t g = 0; g < n_reg; ++g) reg_latent[g] = normal(rng);
  for (std::size_t i = 0; i < n; ++i) idio[i] = normal(rng);
  for (std::size_t t = 1; t < days; ++t) {
    for (std::size_t g = 0; g < n_ind; ++g) {
      ind_latent[t * n_ind + g] = phi * ind_latent[(t - 1) * n_ind + g] + innov * normal(rng);
    }
    for (std::size_t g = 0; g < n_reg; ++g) {
      reg_latent[t * n_reg + g] = phi * reg_latent[(t - 1) * n_reg + g] + innov * normal(rng);
    }
    for (std::size_t i = 0; i < n; ++i) {
      idio[t * n + i] = phi * idio[(t - 1) * n + i] + innov * normal(rng);
    }
  }

  // Trailing mean of the industry factor over tau_signal days.
  std::vector<double> ind_trend(days * n_ind);
  for (std::size_t g = 0; g < n_ind; ++g) {
    for (std::size_t t = 0; t < days; ++t) {
      const std::size_t lo = t + 1 >= cfg.tau_signal ? t + 1 - cfg.tau_signal : 0;
      double s = 0.0;
      for (std::size_t j = lo; j <= t; ++j) s += ind_latent[j * n_ind + g];
      ind_trend[t * n_ind + g] = s / static_cast<double>(t - lo + 1);
    }
  }

  SyntheticMarket m;
  PanelDataset& ds = m.dataset;
  ds.dates = business_days(days);
  for (std::size_t i = 0; i < n; ++i) ds.instruments.push_back(numbered("S", i, 3));
  ds.num_features = nf;

  std::vector<double> features(days * n * nf);
  m.truth.industry_trend.resize(days * n);
  m.truth.signal1.resize(days * n);
  m.truth.signal2.resize(days * n);
  m.truth.clean_return.resize(days * n);
  for (std::size_t t = 0; t < days; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      double* f = &features[(t * n + i) * nf];
      f[0] = ind_latent[t * n_ind + industry_of(i)] + cfg.idio_scale * idio[t * n + i];
      f[1] = normal(rng);
      f[2] = normal(rng);
      f[3] = reg_latent[t * n_reg + region_of(i)] + 0.5 * normal(rng);
      for (std::size_t k = 4; k < nf; ++k) f[k] = normal(rng);
      const std::size_t c = t * n + i;
      m.truth.industry_trend[c] = ind_trend[t * n_ind + industry_of(i)];
      m.truth.signal1[c] = f[1];
      m.truth.signal2[c] = f[2];
      const double eps = normal(rng);
      m.truth.clean_return[c] =
          0.01 * (cfg.trend_weight * m.truth.industry_trend[c] + cfg.signal_weight * f[1] -
                  cfg.signal_weight * f[2] + cfg.noise * eps);
    }
  }
  ds.features = Tensor(Shape{days, n, nf}, std::move(features));

  // Two equal-volume bars straddling the path price; the path compounds the
  // clean returns so labels recovered from VWAPs track them to rounding.
  constexpr double kSpread = 1e-3;
  constexpr double kVolume = 1000.0;
  m.prices.assign(days, std::vector<std::vector<PriceBar>>(n));
  std::vector<double> path(n, 10.0);
  for (std::size_t t = 0; t < days; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      m.prices[t][i] = {PriceBar{path[i] * (1.0 + kSpread), kVolume},
                        PriceBar{path[i] * (1.0 - kSpread), kVolume}};
      path[i] *= 1.0 + m.truth.clean_return[t * n + i];
    }
  }
  LabelSet labels = compute_vwap_returns(m.prices, days, n, &ds.price_is_close);
  ds.labels = Tensor(Shape{days, n}, std::move(labels.labels));
  ds.observed_mask = std::move(labels.observed);
  ds.vwap = std::move(labels.vwap);
  ds.tradable.assign(ds.vwap.size(), 1);

  for (std::size_t i = 0; i < n; ++i) {
    m.industry[ds.instruments[i]] = numbered("IND", industry_of(i), 2);
    m.region[ds.instruments[i]] = numbered("REG", region_of(i), 1);
  }
  m.graphs.instruments = ds.instruments;
  m.graphs.industry = relation_from_membership(m.industry, ds.instruments);
  m.graphs.region = relation_from_membership(m.region, ds.instruments);

  m.factors.dates = ds.dates;
  for (std::size_t t = 0; t < days; ++t) {
    m.factors.risk_free.push_back(1e-4);
    m.factors.mktrf.push_back(0.01 * normal(rng));
    m.factors.smb.push_back(0.005 * normal(rng));
    m.factors.hml.push_back(0.005 * normal(rng));
    m.factors.rmw.push_back(0.003 * normal(rng));
    m.factors.cma.push_back(0.003 * normal(rng));
  }
  return m;
}

}  // namespace act
