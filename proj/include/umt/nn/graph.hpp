#pragma once
#include <functional>
#include <memory>
#include <vector>

#include "umt/nn/tensor.hpp"

namespace umt::nn {

/// One node of the dynamic autodiff tape. Graphs are built per step and
/// freed when the last Var handle drops.
struct Node {
  Tensor value;
  Tensor grad;  // allocated lazily, same shape as value
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Pulls the node's grad into its parents' grads. Receives the node itself
  // so closures never hold a handle to their own output (no ref cycles).
  std::function<void(Node&)> backward_fn;

  explicit Node(Tensor v) : value(std::move(v)) {}

  Tensor& ensure_grad() {
    if (grad.data.empty()) grad = Tensor::zeros(value.shape);
    return grad;
  }
};

using Var = std::shared_ptr<Node>;

/// Data that gradients do not flow into.
inline Var constant(Tensor t) { return std::make_shared<Node>(std::move(t)); }

/// Trainable leaf.
inline Var leaf(Tensor t) {
  auto n = std::make_shared<Node>(std::move(t));
  n->requires_grad = true;
  return n;
}

inline Var make_op(Tensor value, std::vector<Var> parents,
                   std::function<void(Node&)> backward_fn) {
  auto n = std::make_shared<Node>(std::move(value));
  for (const auto& p : parents)
    if (p && p->requires_grad) n->requires_grad = true;
  if (n->requires_grad) {
    n->parents = std::move(parents);
    n->backward_fn = std::move(backward_fn);
  }
  return n;
}

/// Reverse-mode sweep from a scalar root (seed gradient 1). One sweep per
/// built graph: interior grads persist, so a second sweep over the same graph
/// double-counts. Leaf grads accumulate across independently built graphs.
void backward(const Var& root);

/// Clears gradients of every node reachable from `root` (used by tests;
/// training clears through the parameter store instead).
void zero_grad(const Var& root);

}  // namespace umt::nn
