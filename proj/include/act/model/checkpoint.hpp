#pragma once

#include <filesystem>
#include <string>

#include "act/model/config.hpp"
#include "act/model/params.hpp"

namespace act {

// Text layout, LF line endings:
//   act-checkpoint v1
//   config <key>=<value>           one line per ActConfig field, sorted by key
//   param <name> <rank> <dims...>  followed by one line of space-separated values
// Values use shortest round-trip decimals, so save/load is exact.
struct Checkpoint {
  ActConfig config;
  Params params;
};

std::string format_checkpoint(const ActConfig& cfg, const Params& params);
Checkpoint parse_checkpoint(const std::string& text, const std::string& source);

void save_checkpoint(const std::filesystem::path& path, const ActConfig& cfg, const Params& params);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace act
