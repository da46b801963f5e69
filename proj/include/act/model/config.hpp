#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>

namespace act {

enum class PspeMode { full, gat_only };
enum class FciMode { tcn, mlp };
enum class SciMode { counterfactual, mlp };

struct Ablation {
  PspeMode pspe = PspeMode::full;
  FciMode fci = FciMode::tcn;
  SciMode sci = SciMode::counterfactual;
  friend bool operator==(const Ablation&, const Ablation&) = default;
};

struct ActConfig {
  std::size_t F = 8;
  std::size_t T = 40;
  std::size_t d = 64;
  std::size_t tau = 20;
  std::size_t sigma = 5;
  std::size_t w_s = 5;
  std::size_t k = 10;
  double dropout_rate = 0.1;
  double lambda = 0.1;
  double leaky_slope = 0.2;
  std::size_t tcn_kernel = 3;
  double ln_epsilon = 1e-5;
  Ablation ablation;

  // Throws ConfigError on any out-of-range field.
  void validate() const;
  friend bool operator==(const ActConfig&, const ActConfig&) = default;
};

// "none", "wo_pspe", "wo_fci", "wo_sci". Throws ConfigError otherwise.
Ablation ablation_preset(std::string_view name);

std::string_view to_string(PspeMode m);
std::string_view to_string(FciMode m);
std::string_view to_string(SciMode m);

// Flat key=value view used by config files, checkpoints and manifests.
std::map<std::string, std::string> to_key_values(const ActConfig& cfg);
// Applies recognised keys onto cfg and erases them from kv; leftovers are
// left for the caller to reject or consume.
void apply_key_values(ActConfig& cfg, std::map<std::string, std::string>& kv);

// Parses "key = value" lines; '#' starts a comment. Throws ConfigError on a
// line without '=' or a repeated key.
std::map<std::string, std::string> parse_key_value_text(std::string_view text, std::string_view source);

std::size_t parse_size(std::string_view key, std::string_view value);
double parse_real(std::string_view key, std::string_view value);
bool parse_bool(std::string_view key, std::string_view value);

}  // namespace act
