#include "ndkit/autograd.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_set>

namespace ndkit {

namespace {

std::atomic<uint64_t> g_seq{1};

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

void add_grad(Node& parent, const double* delta, int64_t n) {
  ensure_grad(parent);
  double* g = parent.grad.data.data();
  for (int64_t i = 0; i < n; ++i) g[i] += delta[i];
}

}  // namespace

double Node::scalar() const {
  if (value.numel() != 1) {
    throw std::invalid_argument("scalar() on tensor of shape " + shape_str(value.shape));
  }
  return value.data[0];
}

Var constant(Tensor value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = false;
  n->seq = g_seq.fetch_add(1);
  return n;
}

Var leaf(Tensor value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = true;
  n->seq = g_seq.fetch_add(1);
  return n;
}

Var make_op(Tensor value, std::vector<Var> parents, std::function<void(Node&)> backward_fn,
            const char* op_name) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->parents = std::move(parents);
  n->op = op_name;
  for (const auto& p : n->parents) {
    if (p && p->requires_grad) n->requires_grad = true;
  }
  if (n->requires_grad) n->backward_fn = std::move(backward_fn);
  n->seq = g_seq.fetch_add(1);
  return n;
}

std::vector<Node*> collect_graph(const Var& root) {
  std::vector<Node*> nodes;
  std::unordered_set<Node*> seen;
  std::vector<Node*> stack{root.get()};
  seen.insert(root.get());
  while (!stack.empty()) {
    Node* cur = stack.back();
    stack.pop_back();
    nodes.push_back(cur);
    for (const auto& p : cur->parents) {
      if (p && seen.insert(p.get()).second) stack.push_back(p.get());
    }
  }
  std::sort(nodes.begin(), nodes.end(), [](const Node* a, const Node* b) { return a->seq < b->seq; });
  return nodes;
}

void ensure_grad(Node& node) {
  if (node.grad.empty() && node.value.numel() > 0) {
    node.grad = Tensor(node.value.shape);
  }
}

// ---------------------------------------------------------------------------
// conv2d, im2col + GEMM
// ---------------------------------------------------------------------------

namespace {

struct ConvDims {
  int b, c_in, h, w, c_out, k, stride, pad, h_out, w_out;
  int64_t patch;  // c_in * k * k
  int64_t cells;  // h_out * w_out
};

ConvDims conv_dims(const Tensor& x, const Tensor& weight, const Tensor& bias, int stride,
                   int pad) {
  if (x.rank() != 4) throw std::invalid_argument("conv2d: input must be rank 4, got " + shape_str(x.shape));
  if (weight.rank() != 4) throw std::invalid_argument("conv2d: weight must be rank 4, got " + shape_str(weight.shape));
  if (weight.dim(2) != weight.dim(3)) {
    throw std::invalid_argument("conv2d: kernel must be square, got " + shape_str(weight.shape));
  }
  if (x.dim(1) != weight.dim(1)) {
    throw std::invalid_argument("conv2d: input channels of x " + shape_str(x.shape) +
                                " do not match weight " + shape_str(weight.shape));
  }
  if (bias.rank() != 1 || bias.dim(0) != weight.dim(0)) {
    throw std::invalid_argument("conv2d: bias shape " + shape_str(bias.shape) +
                                " does not match weight " + shape_str(weight.shape));
  }
  if (stride < 1) throw std::invalid_argument("conv2d: stride must be positive");
  if (pad < 0) throw std::invalid_argument("conv2d: pad must be non-negative");
  ConvDims d{};
  d.b = x.dim(0);
  d.c_in = x.dim(1);
  d.h = x.dim(2);
  d.w = x.dim(3);
  d.c_out = weight.dim(0);
  d.k = weight.dim(2);
  d.stride = stride;
  d.pad = pad;
  if (d.h + 2 * pad < d.k || d.w + 2 * pad < d.k) {
    throw std::invalid_argument("conv2d: kernel " + std::to_string(d.k) +
                                " larger than padded input " + shape_str(x.shape));
  }
  d.h_out = (d.h + 2 * pad - d.k) / stride + 1;
  d.w_out = (d.w + 2 * pad - d.k) / stride + 1;
  d.patch = static_cast<int64_t>(d.c_in) * d.k * d.k;
  d.cells = static_cast<int64_t>(d.h_out) * d.w_out;
  return d;
}

/// Fill a (patch x cells) row-major matrix with the receptive fields of one image.
void im2col(const double* img, const ConvDims& d, double* col) {
  for (int ci = 0; ci < d.c_in; ++ci) {
    const double* plane = img + static_cast<int64_t>(ci) * d.h * d.w;
    for (int ky = 0; ky < d.k; ++ky) {
      for (int kx = 0; kx < d.k; ++kx) {
        double* row = col + ((static_cast<int64_t>(ci) * d.k + ky) * d.k + kx) * d.cells;
        for (int oy = 0; oy < d.h_out; ++oy) {
          const int iy = oy * d.stride + ky - d.pad;
          double* out = row + static_cast<int64_t>(oy) * d.w_out;
          if (iy < 0 || iy >= d.h) {
            std::fill(out, out + d.w_out, 0.0);
            continue;
          }
          const double* src = plane + static_cast<int64_t>(iy) * d.w;
          for (int ox = 0; ox < d.w_out; ++ox) {
            const int ix = ox * d.stride + kx - d.pad;
            out[ox] = (ix < 0 || ix >= d.w) ? 0.0 : src[ix];
          }
        }
      }
    }
  }
}

/// Scatter-add a (patch x cells) gradient matrix back onto one image.
void col2im(const double* col, const ConvDims& d, double* img_grad) {
  for (int ci = 0; ci < d.c_in; ++ci) {
    double* plane = img_grad + static_cast<int64_t>(ci) * d.h * d.w;
    for (int ky = 0; ky < d.k; ++ky) {
      for (int kx = 0; kx < d.k; ++kx) {
        const double* row = col + ((static_cast<int64_t>(ci) * d.k + ky) * d.k + kx) * d.cells;
        for (int oy = 0; oy < d.h_out; ++oy) {
          const int iy = oy * d.stride + ky - d.pad;
          if (iy < 0 || iy >= d.h) continue;
          const double* src = row + static_cast<int64_t>(oy) * d.w_out;
          double* dst = plane + static_cast<int64_t>(iy) * d.w;
          for (int ox = 0; ox < d.w_out; ++ox) {
            const int ix = ox * d.stride + kx - d.pad;
            if (ix >= 0 && ix < d.w) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

}  // namespace

Var conv2d(const Var& x, const Var& weight, const Var& bias, int stride, int pad) {
  const ConvDims d = conv_dims(x->value, weight->value, bias->value, stride, pad);

  Tensor out({d.b, d.c_out, d.h_out, d.w_out});
  // Receptive-field columns are kept for the backward GEMMs.
  auto cols = std::make_shared<DoubleVec>(
      static_cast<size_t>(d.b) * static_cast<size_t>(d.patch * d.cells));

  ConstMapMat wm(weight->value.data.data(), d.c_out, d.patch);
  for (int b = 0; b < d.b; ++b) {
    double* col = cols->data() + static_cast<int64_t>(b) * d.patch * d.cells;
    im2col(x->value.data.data() + static_cast<int64_t>(b) * d.c_in * d.h * d.w, d, col);
    ConstMapMat colm(col, d.patch, d.cells);
    MapMat outm(out.data.data() + static_cast<int64_t>(b) * d.c_out * d.cells, d.c_out, d.cells);
    outm.noalias() = wm * colm;
    for (int c = 0; c < d.c_out; ++c) outm.row(c).array() += bias->value.data[static_cast<size_t>(c)];
  }

  return make_op(std::move(out), {x, weight, bias}, [d, cols](Node& node) {
    Var xp = node.parents[0];
    Var wp = node.parents[1];
    Var bp = node.parents[2];
    const bool need_dx = xp->requires_grad;
    const bool need_dw = wp->requires_grad;
    const bool need_db = bp->requires_grad;
    if (need_dw) ensure_grad(*wp);
    if (need_db) ensure_grad(*bp);
    if (need_dx) ensure_grad(*xp);

    DoubleVec dcol;
    if (need_dx) dcol.resize(static_cast<size_t>(d.patch * d.cells));
    ConstMapMat wm(wp->value.data.data(), d.c_out, d.patch);
    for (int b = 0; b < d.b; ++b) {
      ConstMapMat dout(node.grad.data.data() + static_cast<int64_t>(b) * d.c_out * d.cells,
                       d.c_out, d.cells);
      const double* col = cols->data() + static_cast<int64_t>(b) * d.patch * d.cells;
      ConstMapMat colm(col, d.patch, d.cells);
      if (need_dw) {
        MapMat dw(wp->grad.data.data(), d.c_out, d.patch);
        dw.noalias() += dout * colm.transpose();
      }
      if (need_db) {
        for (int c = 0; c < d.c_out; ++c) bp->grad.data[static_cast<size_t>(c)] += dout.row(c).sum();
      }
      if (need_dx) {
        MapMat dcolm(dcol.data(), d.patch, d.cells);
        dcolm.noalias() = wm.transpose() * dout;
        col2im(dcol.data(), d,
               xp->grad.data.data() + static_cast<int64_t>(b) * d.c_in * d.h * d.w);
      }
    }
  }, "conv2d");
}

Var relu(const Var& x) {
  Tensor out(x->value.shape);
  const int64_t n = x->value.numel();
  for (int64_t i = 0; i < n; ++i) out.data[static_cast<size_t>(i)] = std::max(0.0, x->value.data[static_cast<size_t>(i)]);
  return make_op(std::move(out), {x}, [](Node& node) {
    Var xp = node.parents[0];
    ensure_grad(*xp);
    const int64_t n = node.value.numel();
    for (int64_t i = 0; i < n; ++i) {
      if (xp->value.data[static_cast<size_t>(i)] > 0.0) {
        xp->grad.data[static_cast<size_t>(i)] += node.grad.data[static_cast<size_t>(i)];
      }
    }
  }, "relu");
}

Var maxpool2d(const Var& x) {
  const Tensor& v = x->value;
  if (v.rank() != 4) throw std::invalid_argument("maxpool2d: input must be rank 4, got " + shape_str(v.shape));
  const int b = v.dim(0), c = v.dim(1), h = v.dim(2), w = v.dim(3);
  if (h % 2 != 0 || w % 2 != 0) {
    throw std::invalid_argument("maxpool2d: spatial dims must be even, got " + shape_str(v.shape));
  }
  const int ho = h / 2, wo = w / 2;
  Tensor out({b, c, ho, wo});
  auto argmax = std::make_shared<std::vector<int64_t>>(static_cast<size_t>(out.numel()));
  int64_t oi = 0;
  for (int bi = 0; bi < b; ++bi) {
    for (int ci = 0; ci < c; ++ci) {
      const int64_t base = (static_cast<int64_t>(bi) * c + ci) * h * w;
      for (int oy = 0; oy < ho; ++oy) {
        for (int ox = 0; ox < wo; ++ox, ++oi) {
          int64_t best = base + static_cast<int64_t>(2 * oy) * w + 2 * ox;
          double best_v = v.data[static_cast<size_t>(best)];
          // first occurrence in row-major order wins ties
          const int64_t cand[3] = {best + 1, best + w, best + w + 1};
          for (int64_t idx : cand) {
            const double cv = v.data[static_cast<size_t>(idx)];
            if (cv > best_v) {
              best_v = cv;
              best = idx;
            }
          }
          out.data[static_cast<size_t>(oi)] = best_v;
          (*argmax)[static_cast<size_t>(oi)] = best;
        }
      }
    }
  }
  return make_op(std::move(out), {x}, [argmax](Node& node) {
    Var xp = node.parents[0];
    ensure_grad(*xp);
    const int64_t n = node.value.numel();
    for (int64_t i = 0; i < n; ++i) {
      xp->grad.data[static_cast<size_t>((*argmax)[static_cast<size_t>(i)])] +=
          node.grad.data[static_cast<size_t>(i)];
    }
  }, "maxpool2d");
}

Var add(const Var& a, const Var& b) {
  check_same_shape(a->value, b->value, "add");
  Tensor out(a->value.shape);
  const int64_t n = out.numel();
  for (int64_t i = 0; i < n; ++i) {
    out.data[static_cast<size_t>(i)] =
        a->value.data[static_cast<size_t>(i)] + b->value.data[static_cast<size_t>(i)];
  }
  return make_op(std::move(out), {a, b}, [](Node& node) {
    for (int pi = 0; pi < 2; ++pi) {
      Var p = node.parents[static_cast<size_t>(pi)];
      if (p->requires_grad) add_grad(*p, node.grad.data.data(), node.grad.numel());
    }
  }, "add");
}

Var mul(const Var& a, const Var& b) {
  check_same_shape(a->value, b->value, "mul");
  Tensor out(a->value.shape);
  const int64_t n = out.numel();
  for (int64_t i = 0; i < n; ++i) {
    out.data[static_cast<size_t>(i)] =
        a->value.data[static_cast<size_t>(i)] * b->value.data[static_cast<size_t>(i)];
  }
  return make_op(std::move(out), {a, b}, [](Node& node) {
    Var a = node.parents[0];
    Var b = node.parents[1];
    const int64_t n = node.value.numel();
    if (a->requires_grad) {
      ensure_grad(*a);
      for (int64_t i = 0; i < n; ++i) {
        a->grad.data[static_cast<size_t>(i)] +=
            node.grad.data[static_cast<size_t>(i)] * b->value.data[static_cast<size_t>(i)];
      }
    }
    if (b->requires_grad) {
      ensure_grad(*b);
      for (int64_t i = 0; i < n; ++i) {
        b->grad.data[static_cast<size_t>(i)] +=
            node.grad.data[static_cast<size_t>(i)] * a->value.data[static_cast<size_t>(i)];
      }
    }
  }, "mul");
}

Var scale(const Var& a, double factor) {
  Tensor out(a->value.shape);
  const int64_t n = out.numel();
  for (int64_t i = 0; i < n; ++i) out.data[static_cast<size_t>(i)] = a->value.data[static_cast<size_t>(i)] * factor;
  return make_op(std::move(out), {a}, [factor](Node& node) {
    Var a = node.parents[0];
    ensure_grad(*a);
    const int64_t n = node.value.numel();
    for (int64_t i = 0; i < n; ++i) {
      a->grad.data[static_cast<size_t>(i)] += node.grad.data[static_cast<size_t>(i)] * factor;
    }
  }, "scale");
}

Var sum(const Var& a) {
  double s = 0.0;
  for (double v : a->value.data) s += v;
  return make_op(Tensor::from({1}, {s}), {a}, [](Node& node) {
    Var a = node.parents[0];
    ensure_grad(*a);
    const double g = node.grad.data[0];
    for (double& gv : a->grad.data) gv += g;
  }, "sum");
}

Var smooth_l1(const Var& pred, const Tensor& target) {
  check_same_shape(pred->value, target, "smooth_l1");
  double total = 0.0;
  const int64_t n = pred->value.numel();
  for (int64_t i = 0; i < n; ++i) {
    const double d = pred->value.data[static_cast<size_t>(i)] - target.data[static_cast<size_t>(i)];
    total += std::abs(d) < 1.0 ? 0.5 * d * d : std::abs(d) - 0.5;
  }
  auto tgt = std::make_shared<Tensor>(target);
  return make_op(Tensor::from({1}, {total}), {pred}, [tgt](Node& node) {
    Var p = node.parents[0];
    ensure_grad(*p);
    const double g = node.grad.data[0];
    const int64_t n = p->value.numel();
    for (int64_t i = 0; i < n; ++i) {
      const double d = p->value.data[static_cast<size_t>(i)] - tgt->data[static_cast<size_t>(i)];
      const double slope = std::abs(d) < 1.0 ? d : (d > 0.0 ? 1.0 : -1.0);
      p->grad.data[static_cast<size_t>(i)] += g * slope;
    }
  }, "smooth_l1");
}

Var softmax_cross_entropy(const Var& logits, const std::vector<int>& labels) {
  const Tensor& z = logits->value;
  if (z.rank() != 2) {
    throw std::invalid_argument("softmax_cross_entropy: logits must be [n,K], got " + shape_str(z.shape));
  }
  const int n = z.dim(0), k = z.dim(1);
  if (static_cast<int>(labels.size()) != n) {
    throw std::invalid_argument("softmax_cross_entropy: " + std::to_string(labels.size()) +
                                " labels for " + std::to_string(n) + " rows");
  }
  for (int label : labels) {
    if (label < 0 || label >= k) {
      throw std::invalid_argument("softmax_cross_entropy: label " + std::to_string(label) +
                                  " out of range [0," + std::to_string(k) + ")");
    }
  }
  auto probs = std::make_shared<Tensor>(Shape{n, k});
  double total = 0.0;
  for (int r = 0; r < n; ++r) {
    const double* row = z.data.data() + static_cast<int64_t>(r) * k;
    double m = row[0];
    for (int j = 1; j < k; ++j) m = std::max(m, row[j]);
    double denom = 0.0;
    for (int j = 0; j < k; ++j) denom += std::exp(row[j] - m);
    const double lse = m + std::log(denom);
    total += lse - row[labels[static_cast<size_t>(r)]];
    for (int j = 0; j < k; ++j) {
      probs->at2(r, j) = std::exp(row[j] - m) / denom;
    }
  }
  const double mean = total / n;
  auto lbl = std::make_shared<std::vector<int>>(labels);
  return make_op(Tensor::from({1}, {mean}), {logits}, [probs, lbl, n, k](Node& node) {
    Var p = node.parents[0];
    ensure_grad(*p);
    const double g = node.grad.data[0] / n;
    for (int r = 0; r < n; ++r) {
      for (int j = 0; j < k; ++j) {
        const double onehot = (j == (*lbl)[static_cast<size_t>(r)]) ? 1.0 : 0.0;
        p->grad.at2(r, j) += g * (probs->at2(r, j) - onehot);
      }
    }
  }, "softmax_cross_entropy");
}

Var gather_rows(const Var& x, const std::vector<std::pair<int, int>>& rows) {
  const Tensor& v = x->value;
  if (v.rank() != 3) {
    throw std::invalid_argument("gather_rows: input must be [b,n,k], got " + shape_str(v.shape));
  }
  const int b = v.dim(0), n = v.dim(1), k = v.dim(2);
  const int m = static_cast<int>(rows.size());
  Tensor out({m, k});
  for (int i = 0; i < m; ++i) {
    const auto [bi, ri] = rows[static_cast<size_t>(i)];
    if (bi < 0 || bi >= b || ri < 0 || ri >= n) {
      throw std::invalid_argument("gather_rows: index (" + std::to_string(bi) + "," +
                                  std::to_string(ri) + ") out of " + shape_str(v.shape));
    }
    const double* src = v.data.data() + (static_cast<int64_t>(bi) * n + ri) * k;
    std::copy(src, src + k, out.data.data() + static_cast<int64_t>(i) * k);
  }
  auto idx = std::make_shared<std::vector<std::pair<int, int>>>(rows);
  return make_op(std::move(out), {x}, [idx, n, k](Node& node) {
    Var p = node.parents[0];
    ensure_grad(*p);
    const int m = static_cast<int>(idx->size());
    for (int i = 0; i < m; ++i) {
      const auto [bi, ri] = (*idx)[static_cast<size_t>(i)];
      double* dst = p->grad.data.data() + (static_cast<int64_t>(bi) * n + ri) * k;
      const double* src = node.grad.data.data() + static_cast<int64_t>(i) * k;
      for (int j = 0; j < k; ++j) dst[j] += src[j];
    }
  }, "gather_rows");
}

Var concat_rows(const Var& a, const Var& b) {
  const Tensor& av = a->value;
  const Tensor& bv = b->value;
  if (av.rank() != 3 || bv.rank() != 3 || av.dim(0) != bv.dim(0) || av.dim(2) != bv.dim(2)) {
    throw std::invalid_argument("concat_rows: incompatible shapes " + shape_str(av.shape) +
                                " and " + shape_str(bv.shape));
  }
  const int batch = av.dim(0), na = av.dim(1), nb = bv.dim(1), k = av.dim(2);
  Tensor out({batch, na + nb, k});
  for (int bi = 0; bi < batch; ++bi) {
    double* dst = out.data.data() + static_cast<int64_t>(bi) * (na + nb) * k;
    const double* sa = av.data.data() + static_cast<int64_t>(bi) * na * k;
    const double* sb = bv.data.data() + static_cast<int64_t>(bi) * nb * k;
    std::copy(sa, sa + static_cast<int64_t>(na) * k, dst);
    std::copy(sb, sb + static_cast<int64_t>(nb) * k, dst + static_cast<int64_t>(na) * k);
  }
  return make_op(std::move(out), {a, b}, [batch, na, nb, k](Node& node) {
    Var ap = node.parents[0];
    Var bp = node.parents[1];
    for (int bi = 0; bi < batch; ++bi) {
      const double* src = node.grad.data.data() + static_cast<int64_t>(bi) * (na + nb) * k;
      if (ap->requires_grad) {
        ensure_grad(*ap);
        double* dst = ap->grad.data.data() + static_cast<int64_t>(bi) * na * k;
        for (int64_t i = 0; i < static_cast<int64_t>(na) * k; ++i) dst[i] += src[i];
      }
      if (bp->requires_grad) {
        ensure_grad(*bp);
        double* dst = bp->grad.data.data() + static_cast<int64_t>(bi) * nb * k;
        const double* s2 = src + static_cast<int64_t>(na) * k;
        for (int64_t i = 0; i < static_cast<int64_t>(nb) * k; ++i) dst[i] += s2[i];
      }
    }
  }, "concat_rows");
}

void backward(const Var& loss) {
  if (!loss) throw std::invalid_argument("backward: null loss");
  if (loss->value.numel() != 1) {
    throw std::invalid_argument("backward: loss must be scalar, got " + shape_str(loss->value.shape));
  }

  std::vector<Node*> nodes;
  std::unordered_set<Node*> seen;
  std::vector<Node*> stack{loss.get()};
  seen.insert(loss.get());
  while (!stack.empty()) {
    Node* cur = stack.back();
    stack.pop_back();
    nodes.push_back(cur);
    for (const auto& p : cur->parents) {
      if (p && p->requires_grad && seen.insert(p.get()).second) stack.push_back(p.get());
    }
  }

  // Intermediate grads are scratch space for this traversal; only leaf grads
  // accumulate across repeated backward() calls.
  for (Node* n : nodes) {
    if (!n->parents.empty() && !n->grad.empty()) {
      std::fill(n->grad.data.begin(), n->grad.data.end(), 0.0);
    }
  }
  ensure_grad(*loss);
  loss->grad.data[0] += 1.0;

  // Reverse creation order is a valid topological order of the forward graph.
  std::sort(nodes.begin(), nodes.end(), [](const Node* a, const Node* b) { return a->seq > b->seq; });
  for (Node* n : nodes) {
    if (n->backward_fn && !n->grad.empty()) n->backward_fn(*n);
  }
}

}  // namespace ndkit
