#include "uniseq/bench/multitask.hpp"

#include <algorithm>
#include <random>

#include "uniseq/common/error.hpp"
#include "uniseq/inference/generate.hpp"
#include "uniseq/model/trainer.hpp"
#include "uniseq/task/patches.hpp"
#include "uniseq/task/resample.hpp"

namespace uniseq::bench {

namespace {

std::vector<task::PatchSequence> to_patch_set(const task::Vocabulary& vocab, const task::TemplateRegistry& registry,
                                              std::span<const task::TaskExample> examples, std::size_t max_patches) {
  std::vector<task::PatchSequence> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) {
    const auto seq = task::serialize_task(vocab, registry.get(ex.task), ex.conditions, ex.target);
    out.push_back(task::to_patches(vocab, seq, max_patches));
  }
  return out;
}

}  // namespace

double teacher_forced_accuracy(const model::MultiScaleModel& model, std::span<const task::PatchSequence> batch) {
  nn::ParamBinding bind(model.params, false);
  const auto r = model::forward_loss(bind, model.cfg, batch, model::LossMode::TargetOnly);
  std::vector<std::uint32_t> targets;
  for (const auto& ps : batch) targets.insert(targets.end(), ps.tokens.begin(), ps.tokens.end());
  const auto& logits = r.logits.value();
  std::size_t hit = 0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (!r.mask[i]) continue;
    const auto row = logits.row(i);
    const auto best = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    hit += best == targets[i] ? 1 : 0;
  }
  return static_cast<double>(hit) / static_cast<double>(r.supervised);
}

double exact_match_accuracy(const model::MultiScaleModel& model, const task::Vocabulary& vocab,
                            const task::TemplateRegistry& registry, std::span<const task::TaskExample> examples) {
  require(!examples.empty(), "exact_match_accuracy: no examples");
  inference::SamplingConfig sc;
  sc.k = 1;
  sc.temperature = 1.0;
  sc.max_patches = model.cfg.max_patches;
  std::size_t hit = 0, total = 0;
  for (const auto& ex : examples) {
    const auto prefix = task::serialize_prefix(vocab, registry.get(ex.task), ex.conditions);
    const auto gen = inference::generate(model, vocab, prefix, sc);
    const std::size_t frames = std::min(gen.grid.frames(), ex.target.frames());
    for (std::size_t t = 0; t < frames; ++t)
      for (std::size_t k = 0; k < ex.target.levels; ++k) hit += gen.grid.at(t, k) == ex.target.at(t, k) ? 1 : 0;
    total += ex.target.codes.size();
  }
  return static_cast<double>(hit) / static_cast<double>(total);
}

TrainReport train_mixture(model::MultiScaleModel& model, const task::Vocabulary& vocab,
                          const task::TemplateRegistry& registry,
                          const std::vector<std::span<const task::TaskExample>>& tasks,
                          const std::vector<double>& weights, const TrainLoopConfig& cfg, const StepCallback& on_step) {
  require(!tasks.empty() && tasks.size() == weights.size(), "train: one weight per task required");
  require(cfg.batch >= 1 && cfg.steps >= 1, "train: batch and steps must be >= 1");
  std::vector<std::vector<task::PatchSequence>> sets;
  std::vector<std::vector<task::PatchSequence>> probes;
  for (const auto& t : tasks) {
    require(!t.empty(), "train: task without examples");
    sets.push_back(to_patch_set(vocab, registry, t, model.cfg.max_patches));
    const std::size_t n = std::min(cfg.probe, sets.back().size());
    probes.emplace_back(sets.back().begin(), sets.back().begin() + static_cast<std::ptrdiff_t>(n));
  }
  auto opt = nn::OptimizerState::for_params(model.params, cfg.adam);
  std::mt19937_64 rng(cfg.seed);
  TrainReport rep;
  std::vector<task::PatchSequence> batch;
  for (std::size_t step = 1; step <= cfg.steps; ++step) {
    batch.clear();
    for (std::size_t b = 0; b < cfg.batch; ++b) {
      const std::size_t ti = tasks.size() == 1 ? 0 : task::sample_task(weights, rng);
      std::uniform_int_distribution<std::size_t> pick(0, sets[ti].size() - 1);
      batch.push_back(sets[ti][pick(rng)]);
    }
    const auto st = model::train_step(model, opt, batch, cfg.mode, cfg.patch_budget);
    rep.losses.push_back(st.loss);
    rep.steps = step;
    if (on_step) on_step(step, st.loss);
    if (cfg.check_every > 0 && step % cfg.check_every == 0) {
      double worst = 1.0;
      for (const auto& p : probes) worst = std::min(worst, teacher_forced_accuracy(model, p));
      rep.probe_accuracy.push_back(worst);
      if (worst >= cfg.stop_accuracy) break;
    }
  }
  return rep;
}

StudyResult run_multitask_study(const StudyConfig& cfg, const std::function<void(const std::string&)>& log) {
  require(cfg.tasks.size() >= 2, "multitask: at least two tasks required");
  std::vector<SyntheticCorpus> corpora;
  for (const auto& s : cfg.tasks) corpora.push_back(gen_synthetic_task(s));
  for (std::size_t i = 1; i < corpora.size(); ++i)
    require(corpora[i].vocab.spec().size() == corpora[0].vocab.spec().size() &&
                corpora[i].vocab.size() == corpora[0].vocab.size() &&
                corpora[i].vocab.audio_levels() == corpora[0].vocab.audio_levels() &&
                corpora[i].vocab.codebook_size() == corpora[0].vocab.codebook_size(),
            "multitask: incompatible vocabularies");
  const auto& vocab = corpora[0].vocab;
  const auto registry = task::TemplateRegistry::defaults();
  model::ModelConfig mc = cfg.model;
  mc.vocab_size = vocab.size();
  mc.n_q = vocab.audio_levels();

  StudyResult res;
  task::ResamplingConfig rc;
  rc.alpha = cfg.alpha;
  for (const auto& c : corpora) rc.counts.push_back(static_cast<double>(c.train.size()));
  res.weights = task::resample_weights(rc);

  for (std::size_t i = 0; i < corpora.size(); ++i) {
    auto m = model::MultiScaleModel::init(mc, cfg.seed + 17 * (i + 1));
    TrainLoopConfig loop = cfg.loop;
    loop.seed = cfg.seed + 101 * (i + 1);
    const auto rep = train_mixture(m, vocab, registry, {std::span<const task::TaskExample>(corpora[i].train)}, {1.0},
                                   loop);
    TaskResult tr;
    tr.task = cfg.tasks[i].task();
    tr.single_steps = rep.steps;
    tr.single_accuracy = exact_match_accuracy(m, vocab, registry, corpora[i].eval);
    if (log) log("single " + tr.task + ": steps=" + std::to_string(rep.steps) + " acc=" + std::to_string(tr.single_accuracy));
    res.tasks.push_back(tr);
  }

  auto joint = model::MultiScaleModel::init(mc, cfg.seed);
  std::vector<std::span<const task::TaskExample>> spans;
  for (const auto& c : corpora) spans.emplace_back(c.train);
  TrainLoopConfig loop = cfg.loop;
  loop.seed = cfg.seed;
  const auto rep = train_mixture(joint, vocab, registry, spans, res.weights, loop);
  res.joint_steps = rep.steps;
  for (std::size_t i = 0; i < corpora.size(); ++i) {
    res.tasks[i].joint_accuracy = exact_match_accuracy(joint, vocab, registry, corpora[i].eval);
    if (log)
      log("joint " + res.tasks[i].task + ": steps=" + std::to_string(rep.steps) +
          " acc=" + std::to_string(res.tasks[i].joint_accuracy));
  }
  return res;
}

}  // namespace uniseq::bench
