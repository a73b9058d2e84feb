#pragma once

#include <string>

#include "cipher/key.hpp"

namespace cipher {

struct KeySpace {
  std::string exact;  // L! as a decimal string
  double log2 = 0.0;  // log2(L!) via log-gamma
};

/// Number of distinct keys: (c*M*M)! for SHF, c! for CP.
KeySpace key_space(const KeySpec& spec);

}  // namespace cipher
