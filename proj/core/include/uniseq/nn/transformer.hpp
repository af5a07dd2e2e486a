#pragma once

#include <random>
#include <span>
#include <string>

#include "uniseq/nn/ops.hpp"
#include "uniseq/nn/params.hpp"

namespace uniseq::nn {

// Shape of a stack of pre-norm causal transformer blocks.
struct StackConfig {
  std::size_t layers = 4;
  std::size_t width = 64;
  std::size_t heads = 4;
  std::size_t ff = 256;

  void validate(const std::string& what) const;
  // Scalar parameter count of the blocks plus the final layer norm.
  std::size_t param_count() const;
  bool operator==(const StackConfig&) const = default;
};

struct AttentionParams {
  Var wq, bq, wk, bk, wv, bv, wo, bo;
  std::size_t heads = 1;
};

// Multi-head causal self-attention including the output projection.
Var causal_self_attention(const Var& x, const AttentionParams& p, std::span<const std::size_t> segments,
                          AttentionCounter* counter);

// Registers "<prefix>.l<i>.*" block parameters and "<prefix>.ln_f.*".
void init_stack(ParamSet& params, const std::string& prefix, const StackConfig& cfg, std::mt19937_64& rng,
                double stddev = 0.02);

// Runs the blocks then the final layer norm. Rows are grouped into causal
// segments as in segment_causal_attention.
Var stack_forward(const ParamBinding& bind, const std::string& prefix, const StackConfig& cfg, Var x,
                  std::span<const std::size_t> segments, AttentionCounter* counter);

}  // namespace uniseq::nn
