#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

namespace ndkit {

/// One splitmix64 step; advances `state` and returns the next value.
uint64_t splitmix64(uint64_t& state);

uint64_t fnv1a64(const void* bytes, size_t n);
uint64_t fnv1a64(std::string_view s);

/// Sub-seed for an independent stream, e.g. derive_seed(seed, "keygen").
uint64_t derive_seed(uint64_t seed, uint64_t stream);
uint64_t derive_seed(uint64_t seed, std::string_view tag);

/// xoshiro256** seeded through splitmix64. State transitions are pure integer
/// arithmetic, so a seed yields the same stream on every platform.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  uint64_t seed() const { return seed_; }
  uint64_t next_u64();
  /// Unbiased draw from [0, bound), bound >= 1.
  uint64_t next_below(uint64_t bound);
  /// [0, 1) with 53 random bits.
  double next_double();
  double uniform(double lo, double hi);
  /// Inclusive integer range.
  int uniform_int(int lo, int hi);
  /// Standard normal via the Marsaglia polar method.
  double next_normal();

  /// Fisher-Yates permutation of {0..n-1}.
  std::vector<int> permutation(int n);
  void shuffle(std::vector<int>& values);

 private:
  uint64_t seed_ = 0;
  std::array<uint64_t, 4> state_{};
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ndkit
