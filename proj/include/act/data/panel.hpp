#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "act/tensor/tensor.hpp"

namespace act {

// Dense N x N 0/1 matrix.
class Adjacency {
 public:
  Adjacency() = default;
  explicit Adjacency(std::size_t n) : n_(n), cells_(n * n, 0) {}

  std::size_t size() const noexcept { return n_; }
  bool operator()(std::size_t i, std::size_t j) const { return cells_[i * n_ + j] != 0; }
  void set(std::size_t i, std::size_t j, bool on) { cells_[i * n_ + j] = on ? 1 : 0; }
  std::size_t degree(std::size_t i) const;
  bool symmetric() const;
  const std::vector<std::uint8_t>& cells() const noexcept { return cells_; }

  friend bool operator==(const Adjacency&, const Adjacency&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> cells_;
};

struct RelationGraphs {
  std::vector<std::string> instruments;
  Adjacency industry;
  Adjacency region;
};

struct PriceBar {
  double price = 0.0;
  double volume = 0.0;
};

// bars[date][instrument] -> bars observed in that cell (possibly none).
using PriceGrid = std::vector<std::vector<std::vector<PriceBar>>>;

struct LabelSet {
  std::vector<double> vwap;           // [D x N], NaN when no bars
  std::vector<double> labels;         // [D x N], NaN when missing
  std::vector<std::uint8_t> observed; // [D x N], 1 iff label present
};

// Instruments absent on any date are dropped; cells are addressed
// [date * N + instrument]. Missing feature cells hold NaN until preprocessing.
struct PanelDataset {
  std::vector<std::string> dates;
  std::vector<std::string> instruments;
  std::size_t num_features = 0;
  Tensor features;                     // [D x N x F], raw
  Tensor labels;                       // [D x N], forward VWAP return, NaN if missing
  std::vector<std::uint8_t> observed_mask;  // [D x N]
  std::vector<std::uint8_t> tradable;       // [D x N], a VWAP exists on that date
  std::vector<double> vwap;                 // [D x N]
  bool price_is_close = false;         // some cell had close-only bars

  std::size_t num_dates() const noexcept { return dates.size(); }
  std::size_t num_instruments() const noexcept { return instruments.size(); }
  double feature(std::size_t t, std::size_t i, std::size_t f) const {
    return features[(t * instruments.size() + i) * num_features + f];
  }
  double label(std::size_t t, std::size_t i) const { return labels[t * instruments.size() + i]; }
  bool observed(std::size_t t, std::size_t i) const {
    return observed_mask[t * instruments.size() + i] != 0;
  }
};

struct FactorSeries {
  std::vector<std::string> dates;
  std::vector<double> risk_free;
  std::vector<double> mktrf, smb, hml, rmw, cma;
};

// VWAP = sum(p*v)/sum(v). A bar with NaN volume is a close-only quote; cells
// made only of such bars use the last close. Throws DataError on negative
// volume or when every volume is zero.
double compute_vwap(const std::vector<PriceBar>& bars, bool* close_only = nullptr);

// labels[t] = (VWAP[t+1] - VWAP[t]) / VWAP[t]; the final date is always missing.
LabelSet compute_vwap_returns(const PriceGrid& prices, std::size_t num_dates,
                              std::size_t num_instruments, bool* close_only = nullptr);

PanelDataset load_panel(const std::filesystem::path& features_path,
                        const std::filesystem::path& prices_path);
// Builds a dataset from already-parsed text (used by load_panel and tests).
PanelDataset parse_panel(const std::string& features_csv, const std::string& prices_csv);

// Canonical features CSV: sorted by (datetime, instrument), shortest
// round-trip decimals, LF endings. Missing cells are written empty.
std::string format_features_csv(const PanelDataset& ds);
void write_panel(const PanelDataset& ds, const std::filesystem::path& path);

std::string format_prices_csv(const std::vector<std::string>& dates,
                              const std::vector<std::string>& instruments,
                              const PriceGrid& prices);

// Realized per-date returns: realized[t] = labels[t-1] (return earned from
// t-1 to t); NaN where unavailable. Row 0 is all NaN.
std::vector<double> realized_returns(const PanelDataset& ds);

// Median imputation, then per-(date, feature) cross-sectional z-score.
PanelDataset preprocess_features(const PanelDataset& ds);

std::map<std::string, std::string> load_membership(const std::filesystem::path& path);
std::map<std::string, std::string> parse_membership(const std::string& csv_text,
                                                    const std::string& source);
std::string format_membership_csv(const std::map<std::string, std::string>& membership);

// A_ij = 1 iff i != j and both map to the same category. Instruments missing
// from the membership are isolated.
Adjacency relation_from_membership(const std::map<std::string, std::string>& membership,
                                   const std::vector<std::string>& instruments);
Adjacency load_relation_graph(const std::filesystem::path& membership_path,
                              const std::vector<std::string>& instruments);

FactorSeries load_factors(const std::filesystem::path& path);
FactorSeries parse_factors(const std::string& csv_text, const std::string& source);
std::string format_factors_csv(const FactorSeries& factors);

}  // namespace act
