#include "cipher/keyspace.hpp"

#include <cmath>
#include <memory>

#include <gmp.h>

namespace cipher {

KeySpace key_space(const KeySpec& spec) {
  spec.validate();
  const unsigned long length = static_cast<unsigned long>(spec.length());

  mpz_t fact;
  mpz_init(fact);
  mpz_fac_ui(fact, length);
  char* str = mpz_get_str(nullptr, 10, fact);
  KeySpace result;
  result.exact = str;
  void (*freefunc)(void*, size_t);
  mp_get_memory_functions(nullptr, nullptr, &freefunc);
  freefunc(str, result.exact.size() + 1);
  mpz_clear(fact);

  // log2(L!) = lgamma(L+1) / ln 2
  result.log2 = std::lgamma(static_cast<double>(length) + 1.0) / std::log(2.0);
  return result;
}

}  // namespace cipher
