#include "bench/manifest.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ndkit/rng.hpp"

namespace bench {

std::string hex64(uint64_t value) {
  std::ostringstream os;
  os << std::hex;
  for (int shift = 60; shift >= 0; shift -= 4) os << ((value >> shift) & 0xf);
  return os.str();
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string bytes = buf.str();
  return hex64(ndkit::fnv1a64(bytes.data(), bytes.size()));
}

std::string json_hash(const nlohmann::json& j) {
  const std::string canonical = j.dump();
  return hex64(ndkit::fnv1a64(canonical.data(), canonical.size()));
}

void write_manifest(const std::string& path, const Manifest& manifest) {
  nlohmann::json j;
  j["artifact_version"] = manifest.artifact_version;
  j["config_hash"] = manifest.config_hash;
  j["config"] = manifest.config;
  nlohmann::json files = nlohmann::json::array();
  for (const auto& [rel, digest] : manifest.files) {
    files.push_back({{"path", rel}, {"digest", digest}});
  }
  j["files"] = std::move(files);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

Manifest read_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  const nlohmann::json j = nlohmann::json::parse(in);
  Manifest manifest;
  manifest.artifact_version = j.at("artifact_version").get<int>();
  manifest.config_hash = j.at("config_hash").get<std::string>();
  manifest.config = j.at("config");
  for (const auto& f : j.at("files")) {
    manifest.files.emplace_back(f.at("path").get<std::string>(), f.at("digest").get<std::string>());
  }
  return manifest;
}

}  // namespace bench
