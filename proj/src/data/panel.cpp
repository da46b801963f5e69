#include "act/data/panel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_map>

#include "act/data/csv.hpp"
#include "act/error.hpp"

namespace act {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string row_context(const csv::Table& table, std::size_t row) {
  return table.source + " row " + std::to_string(row + 2);
}

}  // namespace

std::size_t Adjacency::degree(std::size_t i) const {
  std::size_t d = 0;
  for (std::size_t j = 0; j < n_; ++j) d += cells_[i * n_ + j];
  return d;
}

bool Adjacency::symmetric() const {
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) {
      if (cells_[i * n_ + j] != cells_[j * n_ + i]) return false;
    }
  }
  return true;
}

double compute_vwap(const std::vector<PriceBar>& bars, bool* close_only) {
  if (bars.empty()) return kNaN;
  double notional = 0.0;
  double volume = 0.0;
  bool any_volume = false;
  for (const PriceBar& bar : bars) {
    if (std::isnan(bar.volume)) continue;
    if (bar.volume < 0.0) throw DataError("negative volume in price bar");
    notional += bar.price * bar.volume;
    volume += bar.volume;
    any_volume = true;
  }
  if (!any_volume) {
    if (close_only != nullptr) *close_only = true;
    return bars.back().price;
  }
  if (volume <= 0.0) throw DataError("all-zero volume for an observed price cell");
  return notional / volume;
}

LabelSet compute_vwap_returns(const PriceGrid& prices, std::size_t num_dates,
                              std::size_t num_instruments, bool* close_only) {
  LabelSet out;
  const std::size_t cells = num_dates * num_instruments;
  out.vwap.assign(cells, kNaN);
  out.labels.assign(cells, kNaN);
  out.observed.assign(cells, 0);
  if (prices.size() != num_dates) throw DataError("price grid date count mismatch");
  for (std::size_t t = 0; t < num_dates; ++t) {
    if (prices[t].size() != num_instruments) throw DataError("price grid instrument count mismatch");
    for (std::size_t i = 0; i < num_instruments; ++i) {
      out.vwap[t * num_instruments + i] = compute_vwap(prices[t][i], close_only);
    }
  }
  for (std::size_t t = 0; t + 1 < num_dates; ++t) {
    for (std::size_t i = 0; i < num_instruments; ++i) {
      const double now = out.vwap[t * num_instruments + i];
      const double next = out.vwap[(t + 1) * num_instruments + i];
      if (std::isnan(now) || std::isnan(next)) continue;
      if (!(now > 0.0)) throw DataError("non-positive VWAP used as return denominator");
      out.labels[t * num_instruments + i] = (next - now) / now;
      out.observed[t * num_instruments + i] = 1;
    }
  }
  return out;
}

PanelDataset parse_panel(const std::string& features_csv, const std::string& prices_csv) {
  const csv::Table feat = csv::parse(features_csv, "features");
  if (feat.header.size() < 2 || feat.header[0] != "datetime" || feat.header[1] != "instrument") {
    throw DataError("features: header must start with datetime,instrument");
  }
  const std::size_t num_features = feat.header.size() - 2;
  for (std::size_t f = 0; f < num_features; ++f) {
    if (feat.header[f + 2] != "f" + std::to_string(f)) {
      throw DataError("features: expected column f" + std::to_string(f) + ", got " +
                      feat.header[f + 2]);
    }
  }

  std::set<std::string> date_set;
  std::map<std::string, std::size_t> presence;
  std::map<std::pair<std::string, std::string>, std::size_t> row_of;
  for (std::size_t r = 0; r < feat.rows.size(); ++r) {
    const auto& row = feat.rows[r];
    if (!csv::is_iso_date(row[0])) {
      throw DataError(row_context(feat, r) + ": bad date '" + row[0] + "'");
    }
    if (row[1].empty()) throw DataError(row_context(feat, r) + ": empty instrument");
    if (!row_of.emplace(std::make_pair(row[0], row[1]), r).second) {
      throw DataError(row_context(feat, r) + ": duplicate (" + row[0] + ", " + row[1] + ")");
    }
    date_set.insert(row[0]);
    ++presence[row[1]];
  }

  PanelDataset ds;
  ds.dates.assign(date_set.begin(), date_set.end());
  for (const auto& [instrument, count] : presence) {
    if (count == ds.dates.size()) ds.instruments.push_back(instrument);
  }
  ds.num_features = num_features;
  const std::size_t d_count = ds.dates.size();
  const std::size_t n = ds.instruments.size();

  std::unordered_map<std::string, std::size_t> date_index;
  std::unordered_map<std::string, std::size_t> inst_index;
  for (std::size_t t = 0; t < d_count; ++t) date_index[ds.dates[t]] = t;
  for (std::size_t i = 0; i < n; ++i) inst_index[ds.instruments[i]] = i;

  std::vector<double> features(d_count * n * num_features, kNaN);
  for (const auto& [key, r] : row_of) {
    const auto inst = inst_index.find(key.second);
    if (inst == inst_index.end()) continue;
    const std::size_t base = (date_index.at(key.first) * n + inst->second) * num_features;
    const auto& row = feat.rows[r];
    for (std::size_t f = 0; f < num_features; ++f) {
      const std::string& cell = row[f + 2];
      if (!cell.empty()) features[base + f] = csv::parse_double(cell, row_context(feat, r));
    }
  }
  ds.features = Tensor(Shape{d_count, n, num_features}, std::move(features));

  const csv::Table px = csv::parse(prices_csv, "prices");
  const std::size_t c_date = px.column("datetime");
  const std::size_t c_inst = px.column("instrument");
  const std::size_t c_price = px.column("price");
  const std::size_t c_volume = px.column("volume");
  PriceGrid grid(d_count, std::vector<std::vector<PriceBar>>(n));
  for (std::size_t r = 0; r < px.rows.size(); ++r) {
    const auto& row = px.rows[r];
    if (!csv::is_iso_date(row[c_date])) {
      throw DataError(row_context(px, r) + ": bad date '" + row[c_date] + "'");
    }
    const auto t = date_index.find(row[c_date]);
    const auto i = inst_index.find(row[c_inst]);
    if (t == date_index.end() || i == inst_index.end()) continue;
    PriceBar bar;
    bar.price = csv::parse_double(row[c_price], row_context(px, r));
    bar.volume = row[c_volume].empty() ? kNaN : csv::parse_double(row[c_volume], row_context(px, r));
    grid[t->second][i->second].push_back(bar);
  }
  LabelSet labels = compute_vwap_returns(grid, d_count, n, &ds.price_is_close);
  ds.labels = Tensor(Shape{d_count, n}, std::move(labels.labels));
  ds.observed_mask = std::move(labels.observed);
  ds.vwap = std::move(labels.vwap);
  ds.tradable.resize(ds.vwap.size());
  for (std::size_t c = 0; c < ds.vwap.size(); ++c) ds.tradable[c] = std::isnan(ds.vwap[c]) ? 0 : 1;
  return ds;
}

PanelDataset load_panel(const std::filesystem::path& features_path,
                        const std::filesystem::path& prices_path) {
  return parse_panel(csv::read_text(features_path), csv::read_text(prices_path));
}

std::string format_features_csv(const PanelDataset& ds) {
  std::string out = "datetime,instrument";
  for (std::size_t f = 0; f < ds.num_features; ++f) out += ",f" + std::to_string(f);
  out += '\n';
  for (std::size_t t = 0; t < ds.num_dates(); ++t) {
    for (std::size_t i = 0; i < ds.num_instruments(); ++i) {
      out += ds.dates[t];
      out += ',';
      out += ds.instruments[i];
      for (std::size_t f = 0; f < ds.num_features; ++f) {
        out += ',';
        const double v = ds.feature(t, i, f);
        if (!std::isnan(v)) out += csv::format_double(v);
      }
      out += '\n';
    }
  }
  return out;
}

void write_panel(const PanelDataset& ds, const std::filesystem::path& path) {
  csv::write_text(path, format_features_csv(ds));
}

std::string format_prices_csv(const std::vector<std::string>& dates,
                              const std::vector<std::string>& instruments,
                              const PriceGrid& prices) {
  std::string out = "datetime,instrument,price,volume\n";
  for (std::size_t t = 0; t < dates.size(); ++t) {
    for (std::size_t i = 0; i < instruments.size(); ++i) {
      for (const PriceBar& bar : prices[t][i]) {
        out += dates[t] + ',' + instruments[i] + ',' + csv::format_double(bar.price) + ',';
        if (!std::isnan(bar.volume)) out += csv::format_double(bar.volume);
        out += '\n';
      }
    }
  }
  return out;
}

std::vector<double> realized_returns(const PanelDataset& ds) {
  const std::size_t n = ds.num_instruments();
  std::vector<double> out(ds.num_dates() * n, kNaN);
  for (std::size_t t = 1; t < ds.num_dates(); ++t) {
    for (std::size_t i = 0; i < n; ++i) out[t * n + i] = ds.label(t - 1, i);
  }
  return out;
}

PanelDataset preprocess_features(const PanelDataset& ds) {
  PanelDataset out = ds;
  const std::size_t n = ds.num_instruments();
  const std::size_t nf = ds.num_features;
  std::vector<double> values(ds.features.values().begin(), ds.features.values().end());
  std::vector<double> column;
  for (std::size_t t = 0; t < ds.num_dates(); ++t) {
    for (std::size_t f = 0; f < nf; ++f) {
      column.clear();
      for (std::size_t i = 0; i < n; ++i) {
        const double v = values[(t * n + i) * nf + f];
        if (std::isfinite(v)) column.push_back(v);
      }
      double median = 0.0;
      if (!column.empty()) {
        std::sort(column.begin(), column.end());
        const std::size_t mid = column.size() / 2;
        median = column.size() % 2 == 1 ? column[mid] : 0.5 * (column[mid - 1] + column[mid]);
      }
      double mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double& v = values[(t * n + i) * nf + f];
        if (!std::isfinite(v)) v = median;
        mean += v;
      }
      mean /= static_cast<double>(n);
      double var = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double c = values[(t * n + i) * nf + f] - mean;
        var += c * c;
      }
      const double sd = std::sqrt(var / static_cast<double>(n));
      for (std::size_t i = 0; i < n; ++i) {
        double& v = values[(t * n + i) * nf + f];
        v = sd > 0.0 ? (v - mean) / sd : 0.0;
      }
    }
  }
  out.features = Tensor(ds.features.shape(), std::move(values));
  return out;
}

std::map<std::string, std::string> parse_membership(const std::string& csv_text,
                                                    const std::string& source) {
  const csv::Table table = csv::parse(csv_text, source);
  const std::size_t c_inst = table.column("instrument");
  const std::size_t c_cat = table.column("category");
  std::map<std::string, std::string> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto [it, inserted] = out.emplace(row[c_inst], row[c_cat]);
    if (!inserted && it->second != row[c_cat]) {
      throw DataError(row_context(table, r) + ": conflicting categories for " + row[c_inst]);
    }
  }
  return out;
}

std::map<std::string, std::string> load_membership(const std::filesystem::path& path) {
  return parse_membership(csv::read_text(path), path.string());
}

std::string format_membership_csv(const std::map<std::string, std::string>& membership) {
  std::string out = "instrument,category\n";
  for (const auto& [inst, cat] : membership) out += inst + ',' + cat + '\n';
  return out;
}

Adjacency relation_from_membership(const std::map<std::string, std::string>& membership,
                                   const std::vector<std::string>& instruments) {
  const std::size_t n = instruments.size();
  Adjacency adj(n);
  std::vector<const std::string*> category(n, nullptr);
  for (std::size_t i = 0; i < n; ++i) {
    const auto it = membership.find(instruments[i]);
    if (it != membership.end()) category[i] = &it->second;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && category[i] != nullptr && category[j] != nullptr &&
          *category[i] == *category[j]) {
        adj.set(i, j, true);
      }
    }
  }
  return adj;
}

Adjacency load_relation_graph(const std::filesystem::path& membership_path,
                              const std::vector<std::string>& instruments) {
  return relation_from_membership(load_membership(membership_path), instruments);
}

FactorSeries parse_factors(const std::string& csv_text, const std::string& source) {
  const csv::Table table = csv::parse(csv_text, source);
  const std::size_t c_date = table.column("datetime");
  const std::size_t cols[6] = {table.column("rf"),  table.column("mktrf"), table.column("smb"),
                               table.column("hml"), table.column("rmw"),   table.column("cma")};
  std::vector<std::pair<std::string, std::array<double, 6>>> rows;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (!csv::is_iso_date(row[c_date])) {
      throw DataError(row_context(table, r) + ": bad date '" + row[c_date] + "'");
    }
    std::array<double, 6> v{};
    for (std::size_t k = 0; k < 6; ++k) {
      if (row[cols[k]].empty()) throw DataError(row_context(table, r) + ": missing factor value");
      v[k] = csv::parse_double(row[cols[k]], row_context(table, r));
    }
    rows.emplace_back(row[c_date], v);
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  FactorSeries fs;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (r > 0 && rows[r].first == rows[r - 1].first) {
      throw DataError(source + ": duplicate factor date " + rows[r].first);
    }
    fs.dates.push_back(rows[r].first);
    fs.risk_free.push_back(rows[r].second[0]);
    fs.mktrf.push_back(rows[r].second[1]);
    fs.smb.push_back(rows[r].second[2]);
    fs.hml.push_back(rows[r].second[3]);
    fs.rmw.push_back(rows[r].second[4]);
    fs.cma.push_back(rows[r].second[5]);
  }
  return fs;
}

FactorSeries load_factors(const std::filesystem::path& path) {
  return parse_factors(csv::read_text(path), path.string());
}

std::string format_factors_csv(const FactorSeries& fs) {
  std::string out = "datetime,rf,mktrf,smb,hml,rmw,cma\n";
  for (std::size_t t = 0; t < fs.dates.size(); ++t) {
    out += fs.dates[t];
    for (double v : {fs.risk_free[t], fs.mktrf[t], fs.smb[t], fs.hml[t], fs.rmw[t], fs.cma[t]}) {
      out += ',' + csv::format_double(v);
    }
    out += '\n';
  }
  return out;
}

}  // namespace act
