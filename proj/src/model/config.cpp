#include "act/model/config.hpp"

#include <charconv>
#include <cmath>

#include "act/data/csv.hpp"
#include "act/error.hpp"

namespace act {

void ActConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("config: " + what); };
  if (F < 1) fail("F must be >= 1");
  if (T < 1) fail("T must be >= 1");
  if (d < 1) fail("d must be >= 1");
  if (tau < 1 || sigma < 1 || w_s < 1) fail("tau, sigma and w_s must be >= 1");
  if (k < 1) fail("k must be >= 1");
  if (tcn_kernel < 1) fail("tcn_kernel must be >= 1");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) fail("dropout_rate must be in [0, 1)");
  if (!(lambda >= 0.0 && lambda <= 1.0)) fail("lambda must be in [0, 1]");
  if (!(leaky_slope >= 0.0) || !std::isfinite(leaky_slope)) fail("leaky_slope must be >= 0");
  if (!(ln_epsilon > 0.0)) fail("ln_epsilon must be > 0");
}

Ablation ablation_preset(std::string_view name) {
  Ablation a;
  if (name == "none" || name == "full") return a;
  if (name == "wo_pspe") {
    a.pspe = PspeMode::gat_only;
  } else if (name == "wo_fci") {
    a.fci = FciMode::mlp;
  } else if (name == "wo_sci") {
    a.sci = SciMode::mlp;
  } else {
    throw ConfigError("unknown ablation '" + std::string(name) + "' (none|wo_pspe|wo_fci|wo_sci)");
  }
  return a;
}

std::string_view to_string(PspeMode m) { return m == PspeMode::full ? "full" : "gat_only"; }
std::string_view to_string(FciMode m) { return m == FciMode::tcn ? "tcn" : "mlp"; }
std::string_view to_string(SciMode m) { return m == SciMode::counterfactual ? "counterfactual" : "mlp"; }

std::size_t parse_size(std::string_view key, std::string_view value) {
  std::size_t out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || value.empty()) {
    throw ConfigError("config: " + std::string(key) + " expects a non-negative integer, got '" +
                      std::string(value) + "'");
  }
  return out;
}

double parse_real(std::string_view key, std::string_view value) {
  try {
    return csv::parse_double(value, key);
  } catch (const DataError&) {
    throw ConfigError("config: " + std::string(key) + " expects a number, got '" + std::string(value) + "'");
  }
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("config: " + std::string(key) + " expects true/false, got '" + std::string(value) + "'");
}

std::map<std::string, std::string> to_key_values(const ActConfig& cfg) {
  return {
      {"F", std::to_string(cfg.F)},
      {"T", std::to_string(cfg.T)},
      {"d", std::to_string(cfg.d)},
      {"tau", std::to_string(cfg.tau)},
      {"sigma", std::to_string(cfg.sigma)},
      {"w_s", std::to_string(cfg.w_s)},
      {"k", std::to_string(cfg.k)},
      {"dropout_rate", csv::format_double(cfg.dropout_rate)},
      {"lambda", csv::format_double(cfg.lambda)},
      {"leaky_slope", csv::format_double(cfg.leaky_slope)},
      {"tcn_kernel", std::to_string(cfg.tcn_kernel)},
      {"ln_epsilon", csv::format_double(cfg.ln_epsilon)},
      {"pspe", std::string(to_string(cfg.ablation.pspe))},
      {"fci", std::string(to_string(cfg.ablation.fci))},
      {"sci", std::string(to_string(cfg.ablation.sci))},
  };
}

void apply_key_values(ActConfig& cfg, std::map<std::string, std::string>& kv) {
  auto take = [&](const char* key, auto&& fn) {
    const auto it = kv.find(key);
    if (it == kv.end()) return;
    fn(it->first, it->second);
    kv.erase(it);
  };
  auto size_field = [&](const char* key, std::size_t& field) {
    take(key, [&](const std::string& k, const std::string& v) { field = parse_size(k, v); });
  };
  auto real_field = [&](const char* key, double& field) {
    take(key, [&](const std::string& k, const std::string& v) { field = parse_real(k, v); });
  };
  size_field("F", cfg.F);
  size_field("T", cfg.T);
  size_field("d", cfg.d);
  size_field("tau", cfg.tau);
  size_field("sigma", cfg.sigma);
  size_field("w_s", cfg.w_s);
  size_field("k", cfg.k);
  real_field("dropout_rate", cfg.dropout_rate);
  real_field("lambda", cfg.lambda);
  real_field("leaky_slope", cfg.leaky_slope);
  size_field("tcn_kernel", cfg.tcn_kernel);
  real_field("ln_epsilon", cfg.ln_epsilon);
  take("pspe", [&](const std::string&, const std::string& v) {
    if (v == "full") cfg.ablation.pspe = PspeMode::full;
    else if (v == "gat_only") cfg.ablation.pspe = PspeMode::gat_only;
    else throw ConfigError("config: pspe must be full|gat_only");
  });
  take("fci", [&](const std::string&, const std::string& v) {
    if (v == "tcn") cfg.ablation.fci = FciMode::tcn;
    else if (v == "mlp") cfg.ablation.fci = FciMode::mlp;
    else throw ConfigError("config: fci must be tcn|mlp");
  });
  take("sci", [&](const std::string&, const std::string& v) {
    if (v == "counterfactual") cfg.ablation.sci = SciMode::counterfactual;
    else if (v == "mlp") cfg.ablation.sci = SciMode::mlp;
    else throw ConfigError("config: sci must be counterfactual|mlp");
  });
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::map<std::string, std::string> parse_key_value_text(std::string_view text, std::string_view source) {
  std::map<std::string, std::string> out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = std::string(source) + ":" + std::to_string(line_no);
    if (eq == std::string_view::npos) throw ConfigError(where + ": expected key=value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (!out.emplace(key, value).second) throw ConfigError(where + ": duplicate key '" + key + "'");
  }
  return out;
}

}  // namespace act
