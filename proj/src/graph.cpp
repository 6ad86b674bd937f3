#include "umt/nn/graph.hpp"

#include <stdexcept>
#include <unordered_set>

namespace umt::nn {

namespace {

void topo_collect(Node* n, std::unordered_set<Node*>& seen,
                  std::vector<Node*>& order) {
  // Iterative DFS; graphs can be a few thousand nodes deep.
  struct Frame {
    Node* node;
    std::size_t next_parent;
  };
  std::vector<Frame> stack;
  if (seen.insert(n).second) stack.push_back({n, 0});
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next_parent < f.node->parents.size()) {
      Node* p = f.node->parents[f.next_parent++].get();
      if (p && p->requires_grad && seen.insert(p).second) stack.push_back({p, 0});
    } else {
      order.push_back(f.node);
      stack.pop_back();
    }
  }
}

}  // namespace

void backward(const Var& root) {
  if (!root) throw std::invalid_argument("backward: null root");
  if (root->value.numel() != 1)
    throw std::invalid_argument("backward: root must be scalar");
  if (!root->requires_grad) return;
  root->ensure_grad().data[0] += 1.0;

  std::unordered_set<Node*> seen;
  std::vector<Node*> order;  // parents before children
  topo_collect(root.get(), seen, order);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn && !n->grad.data.empty()) n->backward_fn(*n);
  }
}

void zero_grad(const Var& root) {
  if (!root) return;
  std::unordered_set<Node*> seen;
  std::vector<Node*> order;
  topo_collect(root.get(), seen, order);
  for (Node* n : order) n->grad = Tensor();
}

}  // namespace umt::nn
