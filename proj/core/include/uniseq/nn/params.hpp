#pragma once

#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "uniseq/nn/autograd.hpp"
#include "uniseq/nn/tensor.hpp"

namespace uniseq::nn {

// Ordered, named collection of parameter tensors. Insertion order is the
// canonical order for optimizer state, gradients and checkpoints.
class ParamSet {
 public:
  Tensor& add(std::string name, Tensor init);
  Tensor& add_normal(std::string name, std::vector<std::size_t> shape, double stddev, std::mt19937_64& rng);

  bool contains(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;
  Tensor& get(std::string_view name) { return tensors_[index_of(name)]; }
  const Tensor& get(std::string_view name) const { return tensors_[index_of(name)]; }

  std::size_t size() const { return tensors_.size(); }
  const std::string& name(std::size_t i) const { return names_[i]; }
  Tensor& at(std::size_t i) { return tensors_[i]; }
  const Tensor& at(std::size_t i) const { return tensors_[i]; }
  std::vector<Tensor>& tensors() { return tensors_; }
  const std::vector<Tensor>& tensors() const { return tensors_; }

  // Total number of scalar parameters.
  std::size_t count() const;

  bool operator==(const ParamSet& o) const { return names_ == o.names_ && tensors_ == o.tensors_; }

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> tensors_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Leaf variables for one forward/backward pass over a ParamSet. Bindings are
// per-thread; the ParamSet itself is only read.
class ParamBinding {
 public:
  ParamBinding(const ParamSet& params, bool requires_grad);

  const Var& operator[](std::string_view name) const { return leaves_[params_->index_of(name)]; }

  // Gradients aligned with the ParamSet order; zero tensors for unused leaves.
  std::vector<Tensor> grads() const;

 private:
  const ParamSet* params_;
  std::vector<Var> leaves_;
};

}  // namespace uniseq::nn
