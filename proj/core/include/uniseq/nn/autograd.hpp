#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "uniseq/nn/tensor.hpp"

namespace uniseq::nn {

struct Node {
  Tensor value;
  Tensor grad;  // empty until something flows into it
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  // Zero-initialised gradient buffer, allocated on first use.
  Tensor& grad_buffer();
};

// Handle to a node in a reverse-mode graph. Copies share the node.
class Var {
 public:
  Var() = default;

  static Var constant(Tensor t);
  static Var leaf(Tensor t, bool requires_grad = true);

  const Tensor& value() const { return node_->value; }
  const Tensor& grad() const { return node_->grad; }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  bool defined() const { return static_cast<bool>(node_); }

  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }

  Node& node() const { return *node_; }
  const std::shared_ptr<Node>& node_ptr() const { return node_; }

 private:
  explicit Var(std::shared_ptr<Node> n) : node_(std::move(n)) {}
  friend Var make_result(Tensor, std::vector<Var>, std::function<void(Node&)>);

  std::shared_ptr<Node> node_;
};

// Creates an op output. The backward closure receives the output node and
// must add into parents' grad_buffer(); it is dropped when no parent needs
// gradients.
Var make_result(Tensor value, std::vector<Var> parents, std::function<void(Node&)> backward_fn);

// Seeds d(loss)/d(loss) = 1 and runs reverse accumulation. loss must hold a
// single value.
void backward(const Var& loss);

}  // namespace uniseq::nn
