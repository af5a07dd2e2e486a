#pragma once

#include <span>

#include "uniseq/model/multiscale.hpp"
#include "uniseq/nn/optim.hpp"

namespace uniseq::model {

struct StepStats {
  double loss = 0.0;
  double lr = 0.0;
  std::size_t patches = 0;
};

// One optimizer step on the mean loss of the batch. Throws on an empty batch
// or when the batch holds more than patch_budget patches.
StepStats train_step(MultiScaleModel& model, nn::OptimizerState& opt, std::span<const task::PatchSequence> batch,
                     LossMode mode, std::size_t patch_budget);

// Mean loss without gradients.
double evaluate_loss(const MultiScaleModel& model, std::span<const task::PatchSequence> batch, LossMode mode);

}  // namespace uniseq::model
