#pragma once

#include <functional>
#include <vector>

#include "uniseq/nn/params.hpp"

namespace uniseq::nn {

// Scalar objective evaluated through the autograd graph of a binding.
using Objective = std::function<Var(const ParamBinding&)>;

struct GradCheckResult {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t checked = 0;
};

// Compares reverse-mode gradients with central differences
// (f(w+e) - f(w-e)) / 2e, element by element. The relative error of one
// element is |a - n| / max(|a|, |n|, floor). `stride` > 1 checks every
// stride-th element of each tensor.
GradCheckResult grad_check(const Objective& f, const ParamSet& params, double epsilon,
                           double floor = 1e-6, std::size_t stride = 1);

}  // namespace uniseq::nn
