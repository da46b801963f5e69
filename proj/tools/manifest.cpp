#include "manifest.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <json.hpp>

#include "act/data/csv.hpp"
#include "act/error.hpp"

namespace act::cli {

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(csv::read_text(path)); }

Manifest::Manifest(std::string command, std::uint64_t seed, std::filesystem::path out_dir)
    : command_(std::move(command)), seed_(seed), out_dir_(std::move(out_dir)) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir_, ec);
  if (ec) throw DataError("cannot create output directory " + out_dir_.string() + ": " + ec.message());
}

void Manifest::add_input(const std::string& role, const std::filesystem::path& path) {
  inputs_.push_back({role, path.string(), sha256_file(path)});
}

void Manifest::write_artifact(const std::string& name, const std::string& content) {
  csv::write_text(out_dir_ / name, content);
  artifacts_.push_back({"", name, sha256_hex(content)});
}

void Manifest::add_note(const std::string& key, const std::string& value) { notes_[key] = value; }

void Manifest::finish(double wall_seconds) const {
  nlohmann::ordered_json j;
  j["command"] = command_;
  j["seed"] = seed_;
  j["config"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : config_) j["config"][k] = v;
  j["inputs"] = nlohmann::ordered_json::array();
  for (const auto& e : inputs_) j["inputs"].push_back({{"role", e.role}, {"path", e.path}, {"sha256", e.sha256}});
  j["artifacts"] = nlohmann::ordered_json::array();
  for (const auto& e : artifacts_) j["artifacts"].push_back({{"path", e.path}, {"sha256", e.sha256}});
  if (!notes_.empty()) {
    j["notes"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : notes_) j["notes"][k] = v;
  }
  j["wall_time_seconds"] = wall_seconds;
  csv::write_text(out_dir_ / "manifest.json", j.dump(2) + "\n");
}

}  // namespace act::cli
