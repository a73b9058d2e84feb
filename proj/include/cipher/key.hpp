#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cipher {

/// Bijection over {0..L-1} (rendered 1-based in key files) plus the seed it
/// was generated from, when known.
struct PermutationKey {
  std::vector<int> alpha;  // output slot i reads input slot alpha[i]
  std::optional<uint64_t> seed;

  int length() const { return static_cast<int>(alpha.size()); }
  bool is_identity() const;
};

enum class Kind { CP, SHF };

const char* kind_name(Kind kind);
Kind kind_from_name(const std::string& name);

/// CP is channel permutation (block size fixed at 1); SHF shuffles flattened
/// c*M*M blocks. Key length L = c*M*M.
struct KeySpec {
  Kind kind = Kind::CP;
  int channels = 0;
  int block = 1;

  int length() const { return channels * block * block; }
  void validate() const;
};

KeySpec cp_spec(int channels);
KeySpec shf_spec(int channels, int block);

bool is_bijection(const std::vector<int>& alpha);

/// Uniform random permutation via seeded Fisher-Yates.
PermutationKey keygen(int length, uint64_t seed);
PermutationKey identity_key(int length);
PermutationKey invert_key(const PermutationKey& key);
/// Independent keys from derived sub-seeds; element i equals
/// keygen(length, derive_seed(seed, i)).
std::vector<PermutationKey> random_keys(int count, int length, uint64_t seed);

/// Hex digest of (L, alpha); does not reveal the permutation.
std::string key_fingerprint(const PermutationKey& key);

std::string key_to_json(const PermutationKey& key, const KeySpec& spec);
std::pair<PermutationKey, KeySpec> key_from_json(const std::string& text);
void write_key_file(const std::string& path, const PermutationKey& key, const KeySpec& spec);
std::pair<PermutationKey, KeySpec> read_key_file(const std::string& path);

}  // namespace cipher
