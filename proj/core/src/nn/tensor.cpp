#include "uniseq/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "uniseq/common/error.hpp"

namespace uniseq::nn {

namespace {

std::size_t product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape) : shape_(std::move(shape)), data_(product(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(data.begin(), data.end()) {
  require(product(shape_) == data_.size(),
          "tensor: shape " + shape_str(shape_) + " does not match " + std::to_string(data_.size()) +
              " values");
}

Tensor Tensor::filled(std::vector<std::size_t> shape, double value) {
  Tensor t(std::move(shape));
  t.fill(value);
  return t;
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> values) {
  return Tensor({rows, cols}, std::vector<double>(values));
}

bool Tensor::all_finite() const {
  // x * 0 is NaN exactly for NaN and +-Inf, and the sum keeps it
  double acc = 0.0;
  for (double v : data_) acc += v * 0.0;
  return acc == 0.0;
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

void Tensor::accumulate(const Tensor& other) {
  require(same_shape(other), "tensor accumulate: shape " + shape_str(shape_) + " vs " +
                                 shape_str(other.shape_));
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
}

std::string shape_str(const std::vector<std::size_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

}  // namespace uniseq::nn
