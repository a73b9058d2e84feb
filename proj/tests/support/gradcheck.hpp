#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "ndkit/autograd.hpp"

namespace testsupport {

/// Central finite differences against the analytic gradient.
///
/// `build` must construct a fresh graph from the leaf values and return the
/// scalar loss var. The leaves are perturbed in place coordinate by
/// coordinate with step eps; rel_tol applies to |analytic - fd| relative to
/// max(|analytic|, |fd|), with an absolute floor below which both are
/// considered zero.
struct GradCheckResult {
  bool ok = true;
  double worst_rel_err = 0.0;
  std::string detail;
};

inline GradCheckResult gradcheck(const std::vector<ndkit::Var>& leaves,
                                 const std::function<ndkit::Var()>& build, double eps = 1e-5,
                                 double rel_tol = 1e-6, double abs_floor = 1e-10) {
  GradCheckResult result;

  ndkit::Var loss = build();
  ndkit::backward(loss);
  std::vector<ndkit::Tensor> analytic;
  analytic.reserve(leaves.size());
  for (const auto& leaf : leaves) {
    ndkit::ensure_grad(*leaf);
    analytic.push_back(leaf->grad);
    leaf->grad = ndkit::Tensor();  // reset for any later use
  }

  for (size_t li = 0; li < leaves.size(); ++li) {
    ndkit::Tensor& value = leaves[li]->value;
    for (int64_t i = 0; i < value.numel(); ++i) {
      const double saved = value.data[static_cast<size_t>(i)];
      value.data[static_cast<size_t>(i)] = saved + eps;
      const double up = build()->scalar();
      value.data[static_cast<size_t>(i)] = saved - eps;
      const double down = build()->scalar();
      value.data[static_cast<size_t>(i)] = saved;

      const double fd = (up - down) / (2.0 * eps);
      const double an = analytic[li].data[static_cast<size_t>(i)];
      const double diff = std::abs(fd - an);
      // cancellation noise in the difference quotient scales with |f|
      const double noise_floor = abs_floor * std::max(1.0, std::abs(up) + std::abs(down));
      if (diff <= noise_floor) continue;
      const double rel = diff / std::max({std::abs(fd), std::abs(an), noise_floor});
      result.worst_rel_err = std::max(result.worst_rel_err, rel);
      if (rel > rel_tol) {
        result.ok = false;
        if (result.detail.empty()) {
          result.detail = "leaf " + std::to_string(li) + " coord " + std::to_string(i) +
                          ": analytic " + std::to_string(an) + " vs fd " + std::to_string(fd);
        }
      }
    }
  }
  return result;
}

}  // namespace testsupport
