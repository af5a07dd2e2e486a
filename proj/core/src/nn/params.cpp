#include "uniseq/nn/params.hpp"

#include <numeric>

#include "uniseq/common/error.hpp"

namespace uniseq::nn {

Tensor& ParamSet::add(std::string name, Tensor init) {
  require(!index_.contains(name), "duplicate parameter name: " + name);
  index_.emplace(name, tensors_.size());
  names_.push_back(std::move(name));
  tensors_.push_back(std::move(init));
  return tensors_.back();
}

Tensor& ParamSet::add_normal(std::string name, std::vector<std::size_t> shape, double stddev,
                             std::mt19937_64& rng) {
  Tensor t(std::move(shape));
  std::normal_distribution<double> dist(0.0, stddev);
  for (double& v : t.values()) v = dist(rng);
  return add(std::move(name), std::move(t));
}

bool ParamSet::contains(std::string_view name) const { return index_.contains(std::string(name)); }

std::size_t ParamSet::index_of(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) fail("unknown parameter: " + std::string(name));
  return it->second;
}

std::size_t ParamSet::count() const {
  return std::accumulate(tensors_.begin(), tensors_.end(), std::size_t{0},
                         [](std::size_t acc, const Tensor& t) { return acc + t.numel(); });
}

ParamBinding::ParamBinding(const ParamSet& params, bool requires_grad) : params_(&params) {
  leaves_.reserve(params.size());
  for (const auto& t : params.tensors()) leaves_.push_back(Var::leaf(t, requires_grad));
}

std::vector<Tensor> ParamBinding::grads() const {
  std::vector<Tensor> out;
  out.reserve(leaves_.size());
  for (const auto& leaf : leaves_) {
    if (leaf.grad().empty())
      out.push_back(Tensor::zeros(leaf.value().shape()));
    else
      out.push_back(leaf.grad());
  }
  return out;
}

}  // namespace uniseq::nn
