#pragma once

#include <cstdint>
#include <vector>

#include "uniseq/nn/params.hpp"

namespace uniseq::nn {

// Noam-style schedule normalised so the apex equals `peak`:
//   peak * min(step / warmup, sqrt(warmup / step))
double lr_schedule(std::uint64_t step, double peak, std::uint64_t warmup);

struct AdamConfig {
  double peak_lr = 1e-4;
  std::uint64_t warmup = 10000;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip_norm = 0.0;  // global gradient-norm clip; 0 disables
};

struct OptimizerState {
  AdamConfig cfg;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::uint64_t step = 0;

  static OptimizerState for_params(const ParamSet& params, const AdamConfig& cfg);
};

// One bias-corrected Adam update at rate lr_schedule(step). Throws on shape
// mismatch or non-finite gradients; params are untouched in that case.
// Returns the learning rate used.
double optimizer_step(ParamSet& params, const std::vector<Tensor>& grads, OptimizerState& state);

}  // namespace uniseq::nn
