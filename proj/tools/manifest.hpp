#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "run_config.hpp"

namespace act::cli {

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

// manifest.json: command, seed, resolved config, input digests, artifacts
// (paths relative to the output directory) and wall time.
class Manifest {
 public:
  Manifest(std::string command, std::uint64_t seed, std::filesystem::path out_dir);

  void set_config(Settings config) { config_ = std::move(config); }
  void add_input(const std::string& role, const std::filesystem::path& path);
  // Writes the artifact and records its digest.
  void write_artifact(const std::string& name, const std::string& content);
  void add_note(const std::string& key, const std::string& value);

  const std::filesystem::path& out_dir() const noexcept { return out_dir_; }
  void finish(double wall_seconds) const;

 private:
  struct Entry {
    std::string role;
    std::string path;
    std::string sha256;
  };
  std::string command_;
  std::uint64_t seed_;
  std::filesystem::path out_dir_;
  Settings config_;
  std::vector<Entry> inputs_;
  std::vector<Entry> artifacts_;
  Settings notes_;
};

}  // namespace act::cli
