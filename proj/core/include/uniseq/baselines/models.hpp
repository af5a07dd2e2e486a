#pragma once

#include <span>

#include "uniseq/baselines/layout.hpp"
#include "uniseq/codec/rvq.hpp"
#include "uniseq/nn/optim.hpp"
#include "uniseq/nn/ops.hpp"
#include "uniseq/nn/params.hpp"
#include "uniseq/nn/transformer.hpp"

namespace uniseq::baselines {

// Single causal transformer over the step sequence of a layout.
// Flatten/coarse: one cell per step, input is the previous cell.
// Parallel/delay: input at step s is the summed embedding of step s - 1's
// cells (empty token on padding), n_q output heads.
struct BaselineConfig {
  LayoutKind layout = LayoutKind::Flatten;
  std::size_t n_q = 3;
  std::size_t codebook = 64;
  nn::StackConfig stack{6, 64, 4, 256};
  std::size_t max_len = 768;
  double init_std = 0.02;

  // Level-specific code ids, then <start>, then <empty>.
  std::size_t input_vocab() const { return n_q * codebook + 2; }
  std::size_t bos_id() const { return n_q * codebook; }
  std::size_t empty_id() const { return n_q * codebook + 1; }
  void validate() const;
};

struct BaselineModel {
  BaselineConfig cfg;
  nn::ParamSet params;

  static BaselineModel init(const BaselineConfig& cfg, std::uint64_t seed);
  static std::size_t param_count(const BaselineConfig& cfg);
};

struct BaselineForward {
  nn::Var loss;
  nn::Var logits;  // (steps * n_q) x codebook for parallel/delay, steps x (n_q * codebook) otherwise
  std::size_t supervised = 0;
};

// All grids must share T. Padding positions are excluded from the loss.
BaselineForward baseline_forward(const nn::ParamBinding& bind, const BaselineConfig& cfg,
                                 std::span<const codec::TokenGrid> batch, nn::AttentionCounter* counter = nullptr);

double baseline_train_step(BaselineModel& model, nn::OptimizerState& opt, std::span<const codec::TokenGrid> batch);

// Picks feed-forward width (and, if needed, depth) so the parameter count is
// as close as possible to `target`. Throws when no setting lands within
// `tolerance` (relative).
BaselineConfig match_param_budget(BaselineConfig cfg, std::size_t target, double tolerance = 0.10);

}  // namespace uniseq::baselines
