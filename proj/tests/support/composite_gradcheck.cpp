#include "support/composite_gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace testsupport {

namespace {

void append_u8(std::vector<uint8_t>& sig, uint8_t v) { sig.push_back(v); }

void append_i64(std::vector<uint8_t>& sig, int64_t v) {
  for (int i = 0; i < 8; ++i) sig.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

}  // namespace

std::vector<uint8_t> region_signature(const ndkit::Var& loss) {
  std::vector<uint8_t> sig;
  for (ndkit::Node* node : ndkit::collect_graph(loss)) {
    const std::string op = node->op;
    if (op == "relu") {
      const ndkit::Tensor& pre = node->parents[0]->value;
      uint8_t bits = 0;
      int filled = 0;
      for (double v : pre.data) {
        bits = static_cast<uint8_t>((bits << 1) | (v > 0.0 ? 1 : 0));
        if (++filled == 8) {
          append_u8(sig, bits);
          bits = 0;
          filled = 0;
        }
      }
      if (filled) append_u8(sig, bits);
    } else if (op == "maxpool2d") {
      // recompute the argmax per 2x2 window, first occurrence on ties
      const ndkit::Tensor& x = node->parents[0]->value;
      const int b = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
      for (int bi = 0; bi < b; ++bi) {
        for (int ci = 0; ci < c; ++ci) {
          const int64_t base = (static_cast<int64_t>(bi) * c + ci) * h * w;
          for (int oy = 0; oy < h / 2; ++oy) {
            for (int ox = 0; ox < w / 2; ++ox) {
              int64_t best = base + static_cast<int64_t>(2 * oy) * w + 2 * ox;
              double best_v = x.data[static_cast<size_t>(best)];
              const int64_t cand[3] = {best + 1, best + w, best + w + 1};
              for (int64_t idx : cand) {
                if (x.data[static_cast<size_t>(idx)] > best_v) {
                  best_v = x.data[static_cast<size_t>(idx)];
                  best = idx;
                }
              }
              append_i64(sig, best);
            }
          }
        }
      }
    }
    // smooth_l1 has its |d| = 1 boundary; composite tests keep |d| away from
    // it by construction, so it is not part of the signature
  }
  return sig;
}

CompositeCheck composite_gradcheck(const std::vector<ndkit::Var>& leaves,
                                   const std::function<ndkit::Var()>& build,
                                   int coords_per_leaf, ndkit::Rng& coord_rng, double eps,
                                   double rel_tol, double abs_floor) {
  CompositeCheck result;

  ndkit::Var loss = build();
  ndkit::backward(loss);
  std::vector<ndkit::Tensor> analytic;
  analytic.reserve(leaves.size());
  for (const auto& leaf : leaves) {
    ndkit::ensure_grad(*leaf);
    analytic.push_back(leaf->grad);
    leaf->grad = ndkit::Tensor();
  }

  for (size_t li = 0; li < leaves.size(); ++li) {
    ndkit::Tensor& value = leaves[li]->value;
    const int64_t n = value.numel();
    for (int ci = 0; ci < coords_per_leaf; ++ci) {
      const int64_t i = static_cast<int64_t>(coord_rng.next_below(static_cast<uint64_t>(n)));
      const double saved = value.data[static_cast<size_t>(i)];

      value.data[static_cast<size_t>(i)] = saved + eps;
      ndkit::Var up_var = build();
      const double up = up_var->scalar();
      const auto sig_up = region_signature(up_var);

      value.data[static_cast<size_t>(i)] = saved - eps;
      ndkit::Var down_var = build();
      const double down = down_var->scalar();
      const auto sig_down = region_signature(down_var);

      value.data[static_cast<size_t>(i)] = saved;

      if (sig_up != sig_down) {
        ++result.skipped_kink;
        continue;
      }
      ++result.checked;
      const double fd = (up - down) / (2.0 * eps);
      const double an = analytic[li].data[static_cast<size_t>(i)];
      const double diff = std::abs(fd - an);
      // cancellation noise in the difference quotient scales with |f|
      const double noise_floor = abs_floor * std::max(1.0, std::abs(up) + std::abs(down));
      if (diff <= noise_floor) continue;
      const double rel = diff / std::max({std::abs(fd), std::abs(an), noise_floor});
      result.worst_rel_err = std::max(result.worst_rel_err, rel);
      if (rel > rel_tol) {
        ++result.failures;
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
