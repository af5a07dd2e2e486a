#include "uniseq/model/trainer.hpp"

#include "uniseq/common/error.hpp"

namespace uniseq::model {

StepStats train_step(MultiScaleModel& model, nn::OptimizerState& opt, std::span<const task::PatchSequence> batch,
                     LossMode mode, std::size_t patch_budget) {
  require(!batch.empty(), "train_step: empty batch");
  std::size_t patches = 0;
  for (const auto& ps : batch) patches += ps.size();
  require(patches <= patch_budget, "train_step: batch of " + std::to_string(patches) +
                                       " patches exceeds budget of " + std::to_string(patch_budget));
  StepStats st;
  st.patches = patches;
  std::vector<nn::Tensor> grads;
  {
    nn::ParamBinding bind(model.params, true);
    auto r = forward_loss(bind, model.cfg, batch, mode);
    st.loss = r.loss.value()[0];
    nn::backward(r.loss);
    grads = bind.grads();
  }
  st.lr = nn::optimizer_step(model.params, grads, opt);
  return st;
}

double evaluate_loss(const MultiScaleModel& model, std::span<const task::PatchSequence> batch, LossMode mode) {
  nn::ParamBinding bind(model.params, false);
  return forward_loss(bind, model.cfg, batch, mode).loss.value()[0];
}

}  // namespace uniseq::model
