#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace bench {

std::string hex64(uint64_t value);
std::string file_digest(const std::string& path);
std::string json_hash(const nlohmann::json& j);

/// Re-running with an identical manifest reproduces identical weights and
/// reports (timing excluded).
struct Manifest {
  int artifact_version = 1;
  std::string config_hash;
  nlohmann::json config;
  std::vector<std::pair<std::string, std::string>> files;  // relative path, digest
};

void write_manifest(const std::string& path, const Manifest& manifest);
Manifest read_manifest(const std::string& path);

}  // namespace bench
