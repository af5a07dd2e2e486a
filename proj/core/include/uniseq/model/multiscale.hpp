#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "uniseq/model/config.hpp"
#include "uniseq/nn/autograd.hpp"
#include "uniseq/nn/ops.hpp"
#include "uniseq/nn/params.hpp"
#include "uniseq/task/patches.hpp"

namespace uniseq::model {

// Global transformer over patches plus a local transformer over the n_q
// tokens inside each patch.
struct MultiScaleModel {
  ModelConfig cfg;
  nn::ParamSet params;

  static MultiScaleModel init(const ModelConfig& cfg, std::uint64_t seed);
  // Closed-form count; equals params.count().
  static std::size_t param_count(const ModelConfig& cfg);
};

// K x D_g patch embeddings (bag of token embeddings, projected continuous
// vectors, plus patch positions).
nn::Var patch_embed(const nn::ParamBinding& bind, const ModelConfig& cfg, const task::PatchSequence& ps);

// (K + 1) x D_g: row t is the context for predicting patch t. Row 0 is the
// learned initial context, row t > 0 the global output at patch t - 1.
nn::Var global_contexts(const nn::ParamBinding& bind, const ModelConfig& cfg, const task::PatchSequence& ps,
                        nn::AttentionCounter* counter = nullptr);

// Teacher-forced local pass for P patches. contexts is P x D_g, tokens holds
// P x n_q global ids. Returns (P * n_q) x V logits; row p * n_q + k scores
// token k of patch p and only sees tokens < k of that patch.
nn::Var local_forward(const nn::ParamBinding& bind, const ModelConfig& cfg, const nn::Var& contexts,
                      std::span<const std::uint32_t> tokens, nn::AttentionCounter* counter = nullptr);

struct ForwardResult {
  nn::Var loss;                     // mean NLL over supervised positions
  nn::Var logits;                   // (sum K) * n_q x V
  std::vector<double> nll;          // per position, 0 where unsupervised
  std::vector<bool> mask;           // supervised positions
  std::size_t supervised = 0;
};

// Supervision: All covers every patch after the first; TargetOnly covers the
// target frames and the closing target marker.
std::vector<bool> loss_mask(const task::PatchSequence& ps, LossMode mode);

ForwardResult forward_loss(const nn::ParamBinding& bind, const ModelConfig& cfg,
                           std::span<const task::PatchSequence> batch, LossMode mode,
                           nn::AttentionCounter* counter = nullptr);

// UAW1 weights at `path`, model config JSON at `path` + ".json".
void save_model(const std::filesystem::path& path, const MultiScaleModel& m);
MultiScaleModel load_model(const std::filesystem::path& path);

}  // namespace uniseq::model
