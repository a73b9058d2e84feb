#include "ndkit/optim.hpp"

#include <cmath>
#include <utility>

namespace ndkit {

Param::Param(std::string param_name, Tensor value)
    : name(std::move(param_name)), var(leaf(std::move(value))), momentum(var->value.shape) {}

void sgd_step(const std::vector<Param*>& params, const SgdConfig& cfg) {
  for (Param* p : params) {
    Tensor& value = p->var->value;
    ensure_grad(*p->var);
    const int64_t n = value.numel();
    double* v = p->momentum.data.data();
    double* g = p->var->grad.data.data();
    double* x = value.data.data();
    for (int64_t i = 0; i < n; ++i) {
      v[i] = cfg.momentum * v[i] + g[i] + cfg.weight_decay * x[i];
      x[i] -= cfg.lr * v[i];
      g[i] = 0.0;
    }
  }
}

void zero_grads(const std::vector<Param*>& params) {
  for (Param* p : params) {
    if (!p->var->grad.empty()) {
      std::fill(p->var->grad.data.begin(), p->var->grad.data.end(), 0.0);
    }
  }
}

Tensor he_normal(const Shape& shape, int fan_in, Rng& rng) {
  Tensor t(shape);
  const double std_dev = std::sqrt(2.0 / fan_in);
  for (double& v : t.data) v = rng.next_normal() * std_dev;
  return t;
}

}  // namespace ndkit
