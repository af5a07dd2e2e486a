#include "uniseq/nn/optim.hpp"

#include <algorithm>
#include <cmath>

#include "uniseq/common/error.hpp"

namespace uniseq::nn {

double lr_schedule(std::uint64_t step, double peak, std::uint64_t warmup) {
  require(step >= 1 && warmup >= 1, "lr_schedule: step and warmup must be >= 1");
  const double s = static_cast<double>(step);
  const double w = static_cast<double>(warmup);
  return peak * std::min(s / w, std::sqrt(w / s));
}

OptimizerState OptimizerState::for_params(const ParamSet& params, const AdamConfig& cfg) {
  OptimizerState st;
  st.cfg = cfg;
  for (const auto& t : params.tensors()) {
    st.m.push_back(Tensor::zeros(t.shape()));
    st.v.push_back(Tensor::zeros(t.shape()));
  }
  return st;
}

double optimizer_step(ParamSet& params, const std::vector<Tensor>& grads, OptimizerState& state) {
  require(grads.size() == params.size() && state.m.size() == params.size(),
          "optimizer_step: " + std::to_string(grads.size()) + " gradients for " +
              std::to_string(params.size()) + " parameters");
  double sq = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    require(grads[i].same_shape(params.at(i)) && state.m[i].same_shape(params.at(i)),
            "optimizer_step: shape mismatch for " + params.name(i));
    require(grads[i].all_finite(), "optimizer_step: non-finite gradient for " + params.name(i));
    for (double g : grads[i].values()) sq += g * g;
  }
  double clip = 1.0;
  if (state.cfg.clip_norm > 0.0) {
    const double norm = std::sqrt(sq);
    if (norm > state.cfg.clip_norm) clip = state.cfg.clip_norm / norm;
  }

  ++state.step;
  const auto& c = state.cfg;
  const double lr = lr_schedule(state.step, c.peak_lr, c.warmup);
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params.at(i).values();
    auto& m = state.m[i].values();
    auto& v = state.v[i].values();
    const auto& g = grads[i].values();
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double gj = g[j] * clip;
      m[j] = c.beta1 * m[j] + (1.0 - c.beta1) * gj;
      v[j] = c.beta2 * v[j] + (1.0 - c.beta2) * gj * gj;
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      p[j] -= lr * mhat / (std::sqrt(vhat) + c.eps);
    }
  }
  return lr;
}

}  // namespace uniseq::nn
