#include "uniseq/nn/transformer.hpp"

#include <cmath>

#include "uniseq/common/error.hpp"

namespace uniseq::nn {

void StackConfig::validate(const std::string& what) const {
  require(width >= 1 && heads >= 1 && ff >= 1, what + ": width, heads and ff must be positive");
  require(width % heads == 0, what + ": width " + std::to_string(width) + " not divisible by " +
                                  std::to_string(heads) + " heads");
}

std::size_t StackConfig::param_count() const {
  const std::size_t d = width;
  const std::size_t per_layer = 4 * (d * d + d)   // q, k, v, o
                                + 2 * d * ff + ff + d  // feed-forward
                                + 4 * d;               // two layer norms
  return layers * per_layer + 2 * d;
}

Var causal_self_attention(const Var& x, const AttentionParams& p, std::span<const std::size_t> segments,
                          AttentionCounter* counter) {
  require(x.value().all_finite(), "causal_self_attention: non-finite input");
  Var q = linear(x, p.wq, p.bq);
  Var k = linear(x, p.wk, p.bk);
  Var v = linear(x, p.wv, p.bv);
  Var a = segment_causal_attention(q, k, v, p.heads, segments, counter);
  return linear(a, p.wo, p.bo);
}

void init_stack(ParamSet& params, const std::string& prefix, const StackConfig& cfg, std::mt19937_64& rng,
                double stddev) {
  cfg.validate(prefix);
  const std::size_t d = cfg.width;
  const double std_in = stddev;
  const double std_out = stddev / std::sqrt(2.0 * static_cast<double>(std::max<std::size_t>(cfg.layers, 1)));
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    const std::string p = prefix + ".l" + std::to_string(l) + ".";
    params.add(p + "ln1.g", Tensor::filled({d}, 1.0));
    params.add(p + "ln1.b", Tensor::zeros({d}));
    params.add_normal(p + "attn.wq", {d, d}, std_in, rng);
    params.add(p + "attn.bq", Tensor::zeros({d}));
    params.add_normal(p + "attn.wk", {d, d}, std_in, rng);
    params.add(p + "attn.bk", Tensor::zeros({d}));
    params.add_normal(p + "attn.wv", {d, d}, std_in, rng);
    params.add(p + "attn.bv", Tensor::zeros({d}));
    params.add_normal(p + "attn.wo", {d, d}, std_out, rng);
    params.add(p + "attn.bo", Tensor::zeros({d}));
    params.add(p + "ln2.g", Tensor::filled({d}, 1.0));
    params.add(p + "ln2.b", Tensor::zeros({d}));
    params.add_normal(p + "ff.w1", {d, cfg.ff}, std_in, rng);
    params.add(p + "ff.b1", Tensor::zeros({cfg.ff}));
    params.add_normal(p + "ff.w2", {cfg.ff, d}, std_out, rng);
    params.add(p + "ff.b2", Tensor::zeros({d}));
  }
  params.add(prefix + ".ln_f.g", Tensor::filled({d}, 1.0));
  params.add(prefix + ".ln_f.b", Tensor::zeros({d}));
}

Var stack_forward(const ParamBinding& bind, const std::string& prefix, const StackConfig& cfg, Var x,
                  std::span<const std::size_t> segments, AttentionCounter* counter) {
  require(x.cols() == cfg.width, prefix + ": input width " + std::to_string(x.cols()) + " != " +
                                     std::to_string(cfg.width));
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    const std::string p = prefix + ".l" + std::to_string(l) + ".";
    AttentionParams ap{bind[p + "attn.wq"], bind[p + "attn.bq"], bind[p + "attn.wk"], bind[p + "attn.bk"],
                       bind[p + "attn.wv"], bind[p + "attn.bv"], bind[p + "attn.wo"], bind[p + "attn.bo"],
                       cfg.heads};
    Var h = layer_norm(x, bind[p + "ln1.g"], bind[p + "ln1.b"]);
    x = add(x, causal_self_attention(h, ap, segments, counter));
    h = layer_norm(x, bind[p + "ln2.g"], bind[p + "ln2.b"]);
    h = linear(gelu(linear(h, bind[p + "ff.w1"], bind[p + "ff.b1"])), bind[p + "ff.w2"], bind[p + "ff.b2"]);
    x = add(x, h);
  }
  return layer_norm(x, bind[prefix + ".ln_f.g"], bind[prefix + ".ln_f.b"]);
}

}  // namespace uniseq::nn
