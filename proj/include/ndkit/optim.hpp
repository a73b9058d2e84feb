#pragma once

#include <string>
#include <vector>

#include "ndkit/autograd.hpp"
#include "ndkit/rng.hpp"

namespace ndkit {

/// Trainable tensor plus its SGD momentum buffer (zero-initialized).
struct Param {
  std::string name;
  Var var;
  Tensor momentum;

  Param(std::string param_name, Tensor value);

  Tensor& value() { return var->value; }
  const Tensor& value() const { return var->value; }
};

struct SgdConfig {
  double lr = 1e-3;
  double momentum = 0.9;
  double weight_decay = 0.0005;
};

/// v <- momentum*v + grad + weight_decay*value; value <- value - lr*v.
/// Grads are zeroed afterwards.
void sgd_step(const std::vector<Param*>& params, const SgdConfig& cfg);
void zero_grads(const std::vector<Param*>& params);

/// He-normal init: std = sqrt(2 / fan_in).
Tensor he_normal(const Shape& shape, int fan_in, Rng& rng);

}  // namespace ndkit
