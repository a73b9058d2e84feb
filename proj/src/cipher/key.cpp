#include "cipher/key.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "ndkit/rng.hpp"

namespace cipher {

using nlohmann::json;

bool PermutationKey::is_identity() const {
  for (int i = 0; i < length(); ++i) {
    if (alpha[static_cast<size_t>(i)] != i) return false;
  }
  return true;
}

const char* kind_name(Kind kind) { return kind == Kind::CP ? "CP" : "SHF"; }

Kind kind_from_name(const std::string& name) {
  if (name == "CP") return Kind::CP;
  if (name == "SHF") return Kind::SHF;
  throw std::invalid_argument("unknown key kind \"" + name + "\"");
}

void KeySpec::validate() const {
  if (channels < 1) throw std::invalid_argument("key spec: channel count must be positive");
  if (block < 1) throw std::invalid_argument("key spec: block size must be positive");
  if (kind == Kind::CP && block != 1) {
    throw std::invalid_argument("key spec: CP requires block size 1, got " + std::to_string(block));
  }
}

KeySpec cp_spec(int channels) {
  KeySpec s{Kind::CP, channels, 1};
  s.validate();
  return s;
}

KeySpec shf_spec(int channels, int block) {
  KeySpec s{Kind::SHF, channels, block};
  s.validate();
  return s;
}

bool is_bijection(const std::vector<int>& alpha) {
  std::vector<int> sorted(alpha);
  std::sort(sorted.begin(), sorted.end());
  for (size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i] != static_cast<int>(i)) return false;
  }
  return true;
}

PermutationKey keygen(int length, uint64_t seed) {
  if (length < 1) throw std::invalid_argument("keygen: length must be positive");
  PermutationKey key;
  key.seed = seed;
  ndkit::Rng rng(seed);
  key.alpha = rng.permutation(length);
  return key;
}

PermutationKey identity_key(int length) {
  PermutationKey key;
  key.alpha.resize(static_cast<size_t>(length));
  for (int i = 0; i < length; ++i) key.alpha[static_cast<size_t>(i)] = i;
  return key;
}

PermutationKey invert_key(const PermutationKey& key) {
  PermutationKey inv;
  inv.alpha.assign(key.alpha.size(), 0);
  for (int i = 0; i < key.length(); ++i) {
    inv.alpha[static_cast<size_t>(key.alpha[static_cast<size_t>(i)])] = i;
  }
  return inv;
}

std::vector<PermutationKey> random_keys(int count, int length, uint64_t seed) {
  if (count < 1) throw std::invalid_argument("random_keys: count must be positive");
  std::vector<PermutationKey> keys;
  keys.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    keys.push_back(keygen(length, ndkit::derive_seed(seed, static_cast<uint64_t>(i))));
  }
  return keys;
}

std::string key_fingerprint(const PermutationKey& key) {
  std::vector<int32_t> buf;
  buf.reserve(key.alpha.size() + 1);
  buf.push_back(key.length());
  for (int a : key.alpha) buf.push_back(a);
  const uint64_t h = ndkit::fnv1a64(buf.data(), buf.size() * sizeof(int32_t));
  std::ostringstream os;
  os << std::hex;
  for (int shift = 60; shift >= 0; shift -= 4) os << ((h >> shift) & 0xf);
  return os.str();
}

std::string key_to_json(const PermutationKey& key, const KeySpec& spec) {
  spec.validate();
  if (key.length() != spec.length()) {
    throw std::invalid_argument("key length " + std::to_string(key.length()) +
                                " does not match spec L=" + std::to_string(spec.length()));
  }
  json j;
  j["version"] = 1;
  j["kind"] = kind_name(spec.kind);
  j["L"] = spec.length();
  j["M"] = spec.block;
  if (key.seed) j["seed"] = std::to_string(*key.seed);
  json alpha = json::array();
  for (int a : key.alpha) alpha.push_back(a + 1);  // 1-based on disk
  j["alpha"] = std::move(alpha);
  return j.dump();
}

std::pair<PermutationKey, KeySpec> key_from_json(const std::string& text) {
  json j = json::parse(text);
  if (j.value("version", 0) != 1) throw std::invalid_argument("key file: unsupported version");
  KeySpec spec;
  spec.kind = kind_from_name(j.at("kind").get<std::string>());
  spec.block = j.at("M").get<int>();
  const int length = j.at("L").get<int>();
  if (spec.block < 1 || length < 1 || length % (spec.block * spec.block) != 0) {
    throw std::invalid_argument("key file: inconsistent L and M");
  }
  spec.channels = length / (spec.block * spec.block);
  spec.validate();

  PermutationKey key;
  for (const auto& v : j.at("alpha")) {
    const int a = v.get<int>();
    if (a < 1 || a > length) throw std::invalid_argument("key file: alpha entry out of range");
    key.alpha.push_back(a - 1);
  }
  if (key.length() != length || !is_bijection(key.alpha)) {
    throw std::invalid_argument("key file: alpha is not a bijection on {1.." +
                                std::to_string(length) + "}");
  }
  if (j.contains("seed")) {
    const uint64_t seed = std::stoull(j.at("seed").get<std::string>());
    if (keygen(length, seed).alpha != key.alpha) {
      throw std::invalid_argument("key file: alpha does not match regeneration from seed");
    }
    key.seed = seed;
  }
  return {std::move(key), spec};
}

void write_key_file(const std::string& path, const PermutationKey& key, const KeySpec& spec) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write key file: " + path);
  out << key_to_json(key, spec) << "\n";
}

std::pair<PermutationKey, KeySpec> read_key_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read key file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return key_from_json(buf.str());
}

}  // namespace cipher
