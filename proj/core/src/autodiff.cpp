// SPDX-License-Identifier: Apache-2.0
#include "dmqca/autodiff.hpp"

#include <unordered_set>

#include "dmqca/errors.hpp"

namespace dmqca {

namespace {
thread_local bool g_grad_enabled = true;
}  // namespace

bool grad_enabled() noexcept { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

Tensor& detail::Node::ensure_grad() {
  if (!grad_allocated) {
    grad = Tensor(value.shape(), 0.0);
    grad_allocated = true;
  }
  return grad;
}

Var::Var(Tensor value, bool requires_grad) : node_(std::make_shared<detail::Node>()) {
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
}

Var Var::from_op(Tensor value, std::vector<Var> parents,
                 std::function<void(detail::Node&)> backward) {
  Var out(std::move(value), false);
  if (!g_grad_enabled) return out;
  bool any = false;
  for (const auto& p : parents) any = any || p.requires_grad();
  if (!any) return out;
  out.node_->requires_grad = true;
  out.node_->parents.reserve(parents.size());
  for (auto& p : parents) out.node_->parents.push_back(p.node_);
  out.node_->backward = std::move(backward);
  return out;
}

void Var::zero_grad() {
  if (node_->grad_allocated) node_->grad.fill(0.0);
}

void zero_grad(std::span<Var> vars) {
  for (auto& v : vars) v.zero_grad();
}

void backward(const Var& root) {
  if (!root.defined() || root.value().size() != 1)
    throw ContractError("backward() requires a scalar root, got shape " +
                        (root.defined() ? shape_str(root.shape()) : std::string("<undefined>")));
  if (!root.requires_grad()) return;

  // Iterative post-order DFS; `order` ends up topologically sorted with the
  // root last.
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> visited;
  std::vector<std::pair<detail::Node*, std::size_t>> stack;
  stack.emplace_back(root.node(), 0);
  visited.insert(root.node());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      detail::Node* parent = node->parents[next++].get();
      if (parent->requires_grad && visited.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root.node()->ensure_grad()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* node = *it;
    if (node->backward && node->grad_allocated) node->backward(*node);
  }
}

}  // namespace dmqca
