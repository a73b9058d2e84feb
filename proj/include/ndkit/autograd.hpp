#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "ndkit/tensor.hpp"

namespace ndkit {

class Node;
using Var = std::shared_ptr<Node>;

/// One node of the reverse-mode graph. backward_fn reads this node's grad and
/// accumulates contributions into the parents' grads.
class Node {
 public:
  Tensor value;
  Tensor grad;  // allocated lazily during backward()
  bool requires_grad = false;
  uint64_t seq = 0;  // creation index; fixes the backward traversal order
  const char* op = "";
  std::vector<Var> parents;
  std::function<void(Node&)> backward_fn;

  double scalar() const;
};

/// Every node reachable from `root` through parent edges, in creation order.
std::vector<Node*> collect_graph(const Var& root);

Var constant(Tensor value);
/// Differentiable graph input (weights, probe tensors in tests).
Var leaf(Tensor value);

/// Factory for ops defined outside this module. requires_grad is inherited
/// from the parents; backward_fn may be empty for pure constants.
Var make_op(Tensor value, std::vector<Var> parents, std::function<void(Node&)> backward_fn,
            const char* op_name = "");

/// Allocates a zeroed grad buffer if the node does not have one yet.
void ensure_grad(Node& node);

Var conv2d(const Var& x, const Var& weight, const Var& bias, int stride, int pad);
Var relu(const Var& x);
/// 2x2 window, stride 2. Gradient goes to the first max in row-major order.
Var maxpool2d(const Var& x);

Var add(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double factor);
Var sum(const Var& a);

/// Sum over elements of 0.5*d^2 (|d| < 1) else |d| - 0.5, d = pred - target.
Var smooth_l1(const Var& pred, const Tensor& target);
/// Mean over rows of -log softmax(logits)[label], max-subtraction stabilized.
/// logits is [n, K]; labels has length n with values in [0, K).
Var softmax_cross_entropy(const Var& logits, const std::vector<int>& labels);

/// Select rows (image, row) from a [b, n, k] tensor into [m, k].
Var gather_rows(const Var& x, const std::vector<std::pair<int, int>>& rows);
/// Concatenate two [b, n, k] tensors along the row dimension.
Var concat_rows(const Var& a, const Var& b);

/// Populates grads of every differentiable node reachable from `loss`.
/// Repeated calls accumulate; the optimizer zeroes Param grads after a step.
void backward(const Var& loss);

}  // namespace ndkit
