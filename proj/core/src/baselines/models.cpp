#include "uniseq/baselines/models.hpp"

#include <cmath>
#include <random>

#include "uniseq/common/error.hpp"

namespace uniseq::baselines {

using nn::Tensor;
using nn::Var;

namespace {

bool step_major(LayoutKind k) { return k == LayoutKind::Parallel || k == LayoutKind::Delay; }

}  // namespace

void BaselineConfig::validate() const {
  require(layout != LayoutKind::MultiScale, "baseline: multiscale is not a baseline layout");
  require(n_q >= 1 && codebook >= 1, "baseline: n_q and codebook must be >= 1");
  stack.validate("baseline");
  require(max_len >= 1, "baseline: max_len must be >= 1");
  require(init_std > 0, "baseline: init_std must be > 0");
}

BaselineModel BaselineModel::init(const BaselineConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  BaselineModel m;
  m.cfg = cfg;
  std::mt19937_64 rng(seed);
  const std::size_t d = cfg.stack.width;
  m.params.add_normal("base.tok_emb", {cfg.input_vocab(), d}, cfg.init_std, rng);
  m.params.add_normal("base.pos_emb", {cfg.max_len, d}, cfg.init_std, rng);
  nn::init_stack(m.params, "base", cfg.stack, rng, cfg.init_std);
  m.params.add_normal("base.out.w", {d, cfg.n_q * cfg.codebook}, cfg.init_std, rng);
  m.params.add("base.out.b", Tensor::zeros({cfg.n_q * cfg.codebook}));
  return m;
}

std::size_t BaselineModel::param_count(const BaselineConfig& cfg) {
  const std::size_t d = cfg.stack.width;
  const std::size_t out = cfg.n_q * cfg.codebook;
  return cfg.input_vocab() * d + cfg.max_len * d + cfg.stack.param_count() + d * out + out;
}

BaselineForward baseline_forward(const nn::ParamBinding& bind, const BaselineConfig& cfg,
                                 std::span<const codec::TokenGrid> batch, nn::AttentionCounter* counter) {
  require(!batch.empty(), "baseline: empty batch");
  const std::size_t T = batch.front().frames();
  const std::size_t nq = cfg.n_q;
  const std::size_t V = cfg.codebook;
  for (const auto& g : batch) {
    require(g.levels == nq, "baseline: grid levels do not match n_q");
    require(g.frames() == T && T > 0, "baseline: grids in a batch must share a non-zero T");
    g.validate(V);
  }
  const LayoutSpec layout = make_layout(cfg.layout, T, nq);
  const std::size_t L = layout.sequence_length();
  require(L <= cfg.max_len, "baseline: sequence length " + std::to_string(L) + " exceeds max_len " +
                                std::to_string(cfg.max_len));
  const bool parallel = step_major(cfg.layout);

  std::vector<std::vector<nn::BagEntry>> bags;
  std::vector<std::size_t> positions;
  std::vector<std::size_t> targets;
  std::vector<bool> mask;
  auto joint = [&](const codec::TokenGrid& g, Cell c) { return c.k * V + g.at(c.t, c.k); };
  for (const auto& g : batch) {
    for (std::size_t s = 0; s < L; ++s) {
      positions.push_back(s);
      std::vector<nn::BagEntry> bag;
      if (s == 0) {
        bag.push_back({cfg.bos_id(), 1.0});
      } else if (!parallel) {
        bag.push_back({joint(g, layout.steps[s - 1][0]), 1.0});
      } else {
        for (std::size_t h = 0; h < nq; ++h) {
          std::size_t id = cfg.empty_id();
          for (auto c : layout.steps[s - 1])
            if (c.k == h) id = joint(g, c);
          bag.push_back({id, 1.0});
        }
      }
      bags.push_back(std::move(bag));
      if (!parallel) {
        targets.push_back(joint(g, layout.steps[s][0]));
        mask.push_back(true);
      } else {
        for (std::size_t h = 0; h < nq; ++h) {
          std::size_t tgt = 0;
          bool present = false;
          for (auto c : layout.steps[s])
            if (c.k == h) {
              tgt = g.at(c.t, c.k);
              present = true;
            }
          targets.push_back(tgt);
          mask.push_back(present);
        }
      }
    }
  }
  Var x = nn::add(nn::embedding_bag(bind["base.tok_emb"], bags), nn::gather_rows(bind["base.pos_emb"], positions));
  std::vector<std::size_t> segs(batch.size(), L);
  Var h = nn::stack_forward(bind, "base", cfg.stack, x, segs, counter);
  Var logits = nn::linear(h, bind["base.out.w"], bind["base.out.b"]);
  if (parallel) logits = nn::reshape(logits, logits.rows() * nq, V);
  BaselineForward r;
  r.logits = logits;
  for (bool b : mask) r.supervised += b ? 1 : 0;
  r.loss = nn::cross_entropy(logits, targets, mask);
  return r;
}

double baseline_train_step(BaselineModel& model, nn::OptimizerState& opt, std::span<const codec::TokenGrid> batch) {
  std::vector<Tensor> grads;
  double loss = 0;
  {
    nn::ParamBinding bind(model.params, true);
    auto r = baseline_forward(bind, model.cfg, batch);
    loss = r.loss.value()[0];
    nn::backward(r.loss);
    grads = bind.grads();
  }
  nn::optimizer_step(model.params, grads, opt);
  return loss;
}

BaselineConfig match_param_budget(BaselineConfig cfg, std::size_t target, double tolerance) {
  cfg.validate();
  require(target > 0, "match_param_budget: target must be > 0");
  const std::size_t d = cfg.stack.width;
  const std::size_t base_layers = cfg.stack.layers;
  auto rel = [&](const BaselineConfig& c) {
    const double n = static_cast<double>(BaselineModel::param_count(c));
    return std::abs(n - static_cast<double>(target)) / static_cast<double>(target);
  };
  BaselineConfig best = cfg;
  double best_err = rel(cfg);
  // try the requested depth first, then shallower/deeper stacks
  for (std::size_t delta = 0; delta <= 2 * base_layers + 8; ++delta) {
    for (int sign : {-1, 1}) {
      if (delta == 0 && sign == 1) continue;
      const long long layers = static_cast<long long>(base_layers) + sign * static_cast<long long>(delta);
      if (layers < 1) continue;
      BaselineConfig c = cfg;
      c.stack.layers = static_cast<std::size_t>(layers);
      c.stack.ff = 1;
      const double fixed = static_cast<double>(BaselineModel::param_count(c)) -
                           static_cast<double>(c.stack.layers) * static_cast<double>(2 * d + 1);
      const double per_ff = static_cast<double>(c.stack.layers) * static_cast<double>(2 * d + 1);
      const double ff = std::round((static_cast<double>(target) - fixed) / per_ff);
      if (ff < 1) continue;
      c.stack.ff = static_cast<std::size_t>(ff);
      const double e = rel(c);
      if (e < best_err) {
        best = c;
        best_err = e;
      }
    }
    if (best_err <= tolerance) break;
  }
  require(best_err <= tolerance, "match_param_budget: no setting within " + std::to_string(tolerance * 100) +
                                     "% of " + std::to_string(target) + " parameters");
  return best;
}

}  // namespace uniseq::baselines
