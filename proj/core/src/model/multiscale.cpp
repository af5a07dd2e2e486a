#include "uniseq/model/multiscale.hpp"

#include <random>

#include "uniseq/common/binary_io.hpp"
#include "uniseq/common/error.hpp"
#include "uniseq/nn/checkpoint.hpp"
#include "uniseq/nn/transformer.hpp"

namespace uniseq::model {

using nn::Tensor;
using nn::Var;

MultiScaleModel MultiScaleModel::init(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  MultiScaleModel m;
  m.cfg = cfg;
  std::mt19937_64 rng(seed);
  const std::size_t V = cfg.vocab_size;
  const std::size_t dg = cfg.global.width;
  const std::size_t dl = cfg.local.width;
  const double s = cfg.init_std;
  auto& p = m.params;
  p.add_normal("global.tok_emb", {V, dg}, s, rng);
  p.add_normal("global.pos_emb", {cfg.max_patches, dg}, s, rng);
  p.add_normal("global.cont_proj.w", {cfg.cont_dim, dg}, s, rng);
  p.add("global.cont_proj.b", Tensor::zeros({dg}));
  p.add_normal("global.init_ctx", {1, dg}, s, rng);
  nn::init_stack(p, "global", cfg.global, rng, s);
  p.add_normal("local.ctx_proj.w", {dg, dl}, s, rng);
  p.add("local.ctx_proj.b", Tensor::zeros({dl}));
  p.add_normal("local.tok_emb", {V, dl}, s, rng);
  p.add_normal("local.pos_emb", {cfg.n_q, dl}, s, rng);
  p.add_normal("local.sop", {1, dl}, s, rng);
  nn::init_stack(p, "local", cfg.local, rng, s);
  p.add_normal("local.out.w", {dl, V}, s, rng);
  p.add("local.out.b", Tensor::zeros({V}));
  return m;
}

std::size_t MultiScaleModel::param_count(const ModelConfig& cfg) {
  const std::size_t V = cfg.vocab_size;
  const std::size_t dg = cfg.global.width;
  const std::size_t dl = cfg.local.width;
  return V * dg + cfg.max_patches * dg + cfg.cont_dim * dg + dg + dg + cfg.global.param_count() + dg * dl + dl +
         V * dl + cfg.n_q * dl + dl + cfg.local.param_count() + dl * V + V;
}

namespace {

void check_patches(const ModelConfig& cfg, const task::PatchSequence& ps) {
  require(ps.width == cfg.n_q, "model: patch width " + std::to_string(ps.width) + " != n_q " +
                                   std::to_string(cfg.n_q));
  require(ps.size() >= 1, "model: empty patch sequence");
  require(ps.size() <= cfg.max_patches, "context overflow: " + std::to_string(ps.size()) +
                                            " patches exceeds max context of " + std::to_string(cfg.max_patches));
  for (auto id : ps.tokens)
    require(id < cfg.vocab_size, "model: token id " + std::to_string(id) + " outside vocabulary of " +
                                     std::to_string(cfg.vocab_size));
  for (const auto& v : ps.vectors)
    require(v.size() == cfg.cont_dim, "model: continuous vector of dim " + std::to_string(v.size()) +
                                          ", expected " + std::to_string(cfg.cont_dim));
}

// Patch embeddings of several sequences stacked row-wise.
Var embed_many(const nn::ParamBinding& bind, const ModelConfig& cfg, std::span<const task::PatchSequence> batch) {
  std::vector<std::vector<nn::BagEntry>> bags;
  std::vector<std::size_t> positions;
  std::vector<std::size_t> cont_rows;
  std::vector<double> cont_data;
  for (const auto& ps : batch) {
    check_patches(cfg, ps);
    for (std::size_t t = 0; t < ps.size(); ++t) {
      const auto ids = ps.patch(t);
      std::vector<nn::BagEntry> bag;
      switch (ps.kinds[t]) {
        case task::PatchKind::AudioFrame:
          for (auto id : ids) bag.push_back({id, 1.0});
          break;
        case task::PatchKind::RepeatedDiscrete: bag.push_back({ids[0], 1.0}); break;
        case task::PatchKind::Continuous: {
          cont_rows.push_back(bags.size());
          const auto& v = ps.vectors[ps.vector_index[t]];
          cont_data.insert(cont_data.end(), v.begin(), v.end());
          break;
        }
      }
      bags.push_back(std::move(bag));
      positions.push_back(t);
    }
  }
  Var x = nn::embedding_bag(bind["global.tok_emb"], bags);
  if (!cont_rows.empty()) {
    Tensor c({cont_rows.size(), cfg.cont_dim}, std::move(cont_data));
    Var proj = nn::linear(Var::constant(std::move(c)), bind["global.cont_proj.w"], bind["global.cont_proj.b"]);
    x = nn::scatter_add_rows(x, proj, cont_rows);
  }
  return nn::add(x, nn::gather_rows(bind["global.pos_emb"], positions));
}

// Context rows for every patch of every sequence: init_ctx for the first
// patch of a sequence, otherwise the previous global output.
Var contexts_many(const nn::ParamBinding& bind, const ModelConfig& cfg, std::span<const task::PatchSequence> batch,
                  nn::AttentionCounter* counter) {
  Var x = embed_many(bind, cfg, batch);
  std::vector<std::size_t> segs;
  for (const auto& ps : batch) segs.push_back(ps.size());
  Var g = nn::stack_forward(bind, "global", cfg.global, x, segs, counter);
  std::vector<std::size_t> ids;
  std::size_t ofs = 0;
  for (const auto& ps : batch) {
    for (std::size_t t = 0; t < ps.size(); ++t) ids.push_back(t == 0 ? 0 : 1 + ofs + t - 1);
    ofs += ps.size();
  }
  return nn::gather_rows(nn::concat_rows(bind["global.init_ctx"], g), ids);
}

}  // namespace

Var patch_embed(const nn::ParamBinding& bind, const ModelConfig& cfg, const task::PatchSequence& ps) {
  return embed_many(bind, cfg, std::span<const task::PatchSequence>(&ps, 1));
}

Var global_contexts(const nn::ParamBinding& bind, const ModelConfig& cfg, const task::PatchSequence& ps,
                    nn::AttentionCounter* counter) {
  Var x = patch_embed(bind, cfg, ps);
  const std::size_t segs[] = {ps.size()};
  Var g = nn::stack_forward(bind, "global", cfg.global, x, segs, counter);
  return nn::concat_rows(bind["global.init_ctx"], g);
}

Var local_forward(const nn::ParamBinding& bind, const ModelConfig& cfg, const Var& contexts,
                  std::span<const std::uint32_t> tokens, nn::AttentionCounter* counter) {
  const std::size_t nq = cfg.n_q;
  const std::size_t P = contexts.rows();
  require(contexts.cols() == cfg.global.width, "local_forward: context width mismatch");
  require(tokens.size() == P * nq, "local_forward: expected " + std::to_string(P * nq) + " tokens (patch width " +
                                       std::to_string(nq) + "), got " + std::to_string(tokens.size()));
  const std::size_t V = cfg.vocab_size;
  std::vector<std::size_t> in_ids(P * nq);
  std::vector<std::size_t> pos_ids(P * nq);
  for (std::size_t p = 0; p < P; ++p)
    for (std::size_t k = 0; k < nq; ++k) {
      if (k > 0) require(tokens[p * nq + k - 1] < V, "local_forward: token id outside vocabulary");
      in_ids[p * nq + k] = k == 0 ? V : tokens[p * nq + k - 1];
      pos_ids[p * nq + k] = k;
    }
  Var emb = nn::gather_rows(nn::concat_rows(bind["local.tok_emb"], bind["local.sop"]), in_ids);
  Var ctx = nn::repeat_rows(nn::linear(contexts, bind["local.ctx_proj.w"], bind["local.ctx_proj.b"]), nq);
  Var x = nn::add(nn::add(emb, ctx), nn::gather_rows(bind["local.pos_emb"], pos_ids));
  std::vector<std::size_t> segs(P, nq);
  Var h = nn::stack_forward(bind, "local", cfg.local, x, segs, counter);
  return nn::linear(h, bind["local.out.w"], bind["local.out.b"]);
}

std::vector<bool> loss_mask(const task::PatchSequence& ps, LossMode mode) {
  std::vector<bool> mask(ps.size() * ps.width, false);
  for (std::size_t t = 0; t < ps.size(); ++t) {
    const bool on = mode == LossMode::All ? t > 0 : ps.in_target[t] != 0;
    for (std::size_t k = 0; k < ps.width; ++k) mask[t * ps.width + k] = on;
  }
  return mask;
}

ForwardResult forward_loss(const nn::ParamBinding& bind, const ModelConfig& cfg,
                           std::span<const task::PatchSequence> batch, LossMode mode, nn::AttentionCounter* counter) {
  require(!batch.empty(), "forward_loss: empty batch");
  Var ctx = contexts_many(bind, cfg, batch, counter);
  std::vector<std::uint32_t> tokens;
  std::vector<std::size_t> targets;
  ForwardResult r;
  for (const auto& ps : batch) {
    tokens.insert(tokens.end(), ps.tokens.begin(), ps.tokens.end());
    const auto m = loss_mask(ps, mode);
    r.mask.insert(r.mask.end(), m.begin(), m.end());
  }
  targets.assign(tokens.begin(), tokens.end());
  for (bool b : r.mask) r.supervised += b ? 1 : 0;
  require(r.supervised > 0, "forward_loss: no supervised positions under loss mode " +
                                std::string(loss_mode_name(mode)));
  r.logits = local_forward(bind, cfg, ctx, tokens, counter);
  r.loss = nn::cross_entropy(r.logits, targets, r.mask, &r.nll);
  return r;
}

void save_model(const std::filesystem::path& path, const MultiScaleModel& m) {
  nn::save_checkpoint(path, m.params);
  const std::string js = m.cfg.to_json();
  io::write_file(path.string() + ".json",
                 std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(js.data()), js.size()));
}

MultiScaleModel load_model(const std::filesystem::path& path) {
  const auto js = io::read_file(path.string() + ".json");
  MultiScaleModel m;
  m.cfg = ModelConfig::from_json(std::string_view(reinterpret_cast<const char*>(js.data()), js.size()));
  m.params = nn::load_checkpoint(path);
  const MultiScaleModel ref = MultiScaleModel::init(m.cfg, 0);
  require(ref.params.size() == m.params.size(), "model checkpoint: parameter count does not match config");
  for (std::size_t i = 0; i < ref.params.size(); ++i) {
    if (ref.params.name(i) != m.params.name(i) || ref.params.at(i).shape() != m.params.at(i).shape())
      throw FormatError("model checkpoint: parameter '" + m.params.name(i) + "' does not match config");
  }
  return m;
}

}  // namespace uniseq::model
