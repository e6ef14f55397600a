// SPDX-License-Identifier: Apache-2.0
//
// Reverse-mode automatic differentiation over Tensor values.
//
// A Var is a shared handle to a graph node. Leaves created with
// requires_grad = true are trainable parameters; every operation whose
// inputs require gradients records a backward closure that accumulates
// into its parents. Graphs are single-writer: do not run backward() on a
// graph from two threads at once.

#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "dmqca/tensor.hpp"

namespace dmqca {

class Var;

namespace detail {

struct Node {
  Tensor value;
  Tensor grad;  // allocated lazily; logically zero until then
  bool requires_grad = false;
  bool grad_allocated = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this node's grad and accumulates into parents.
  std::function<void(Node&)> backward;

  Tensor& ensure_grad();
};

}  // namespace detail

class Var {
 public:
  Var() = default;
  explicit Var(Tensor value, bool requires_grad = false);

  static Var parameter(Tensor value) { return Var(std::move(value), true); }
  static Var constant(Tensor value) { return Var(std::move(value), false); }

  /// Builds an interior node. If no parent requires a gradient the node is
  /// recorded as a constant and `backward` is dropped.
  static Var from_op(Tensor value, std::vector<Var> parents,
                     std::function<void(detail::Node&)> backward);

  bool defined() const noexcept { return node_ != nullptr; }
  const Tensor& value() const { return node_->value; }
  /// Direct access for optimizers and checkpoint loading.
  Tensor& mutable_value() { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }

  bool requires_grad() const { return node_->requires_grad; }
  /// Gradient with the same shape as value(); zeros until backward() runs.
  const Tensor& grad() const { return node_->ensure_grad(); }
  Tensor& grad() { return node_->ensure_grad(); }
  void zero_grad();

  detail::Node* node() const noexcept { return node_.get(); }
  const std::shared_ptr<detail::Node>& node_ptr() const noexcept { return node_; }

 private:
  std::shared_ptr<detail::Node> node_;
};

/// Populates gradients on every node reachable from `root`, which must be a
/// single-element tensor. Gradients accumulate; call zero_grad() between
/// steps.
void backward(const Var& root);

void zero_grad(std::span<Var> vars);

/// While alive on the current thread, operations record no backward graph.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled() noexcept;

}  // namespace dmqca
